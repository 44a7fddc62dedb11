//! Recursive-descent parser for the IL text format.
//!
//! The grammar is documented in the repository README. Line/column
//! information is attached to declarations for diagnostics.

use super::ast::*;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
#[error("parse error at {line}:{col}: {msg}")]
pub struct ParseError {
    pub line: u32,
    pub col: u32,
    pub msg: String,
}

pub fn parse(text: &str) -> Result<Program, ParseError> {
    let mut p = Parser::new(text);
    p.parse_program()
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
    line: u32,
    col: u32,
}

impl Parser {
    fn new(text: &str) -> Self {
        Parser { chars: text.chars().collect(), pos: 0, line: 1, col: 1 }
    }

    fn span(&self) -> Span {
        Span::new(self.line, self.col)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError { line: self.line, col: self.col, msg: msg.into() })
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn skip_trivia(&mut self) {
        loop {
            match self.peek() {
                Some(c) if c.is_whitespace() => {
                    self.bump();
                }
                Some('/') if self.chars.get(self.pos + 1) == Some(&'/') => {
                    while let Some(c) = self.peek() {
                        if c == '\n' {
                            break;
                        }
                        self.bump();
                    }
                }
                _ => break,
            }
        }
    }

    fn at_eof(&mut self) -> bool {
        self.skip_trivia();
        self.peek().is_none()
    }

    /// Consume `tok` if it is next (punctuation or exact keyword).
    fn try_consume(&mut self, tok: &str) -> bool {
        self.skip_trivia();
        let save = (self.pos, self.line, self.col);
        for expect in tok.chars() {
            if self.peek() == Some(expect) {
                self.bump();
            } else {
                (self.pos, self.line, self.col) = save;
                return false;
            }
        }
        // keywords must not be a prefix of a longer identifier
        if tok.chars().all(is_ident_char) {
            if let Some(c) = self.peek() {
                if is_ident_char(c) {
                    (self.pos, self.line, self.col) = save;
                    return false;
                }
            }
        }
        true
    }

    fn expect(&mut self, tok: &str) -> Result<(), ParseError> {
        if self.try_consume(tok) {
            Ok(())
        } else {
            self.err(format!("expected `{tok}`"))
        }
    }

    fn peek_ident(&mut self) -> Option<String> {
        self.skip_trivia();
        let save = (self.pos, self.line, self.col);
        let id = self.parse_ident_raw();
        (self.pos, self.line, self.col) = save;
        id
    }

    fn parse_ident_raw(&mut self) -> Option<String> {
        let first = self.peek()?;
        if !(first.is_ascii_alphabetic() || first == '_') {
            return None;
        }
        let mut s = String::new();
        while let Some(c) = self.peek() {
            if is_ident_char(c) {
                s.push(c);
                self.bump();
            } else {
                break;
            }
        }
        Some(s)
    }

    fn parse_ident(&mut self) -> Result<String, ParseError> {
        self.skip_trivia();
        match self.parse_ident_raw() {
            Some(s) => Ok(s),
            None => self.err("expected identifier"),
        }
    }

    fn parse_number(&mut self) -> Result<u64, ParseError> {
        self.skip_trivia();
        let mut digits = String::new();
        while let Some(c) = self.peek() {
            if c.is_ascii_digit() {
                digits.push(c);
                self.bump();
            } else {
                break;
            }
        }
        if digits.is_empty() {
            return self.err("expected number");
        }
        digits.parse::<u64>().map_err(|_| ParseError {
            line: self.line,
            col: self.col,
            msg: format!("number `{digits}` out of range"),
        })
    }

    fn peek_is_number(&mut self) -> bool {
        self.skip_trivia();
        matches!(self.peek(), Some(c) if c.is_ascii_digit())
    }

    // --- top level ---

    fn parse_program(&mut self) -> Result<Program, ParseError> {
        let mut components = Vec::new();
        while !self.at_eof() {
            components.push(self.parse_component()?);
        }
        Ok(Program { components })
    }

    fn parse_component(&mut self) -> Result<Component, ParseError> {
        self.skip_trivia();
        let span = self.span();
        self.expect("component")?;
        let name = self.parse_ident()?;
        self.expect("(")?;
        let inputs = self.parse_port_list()?;
        self.expect(")")?;
        self.expect("->")?;
        self.expect("(")?;
        let outputs = self.parse_port_list()?;
        self.expect(")")?;
        self.expect("{")?;

        self.expect("cells")?;
        self.expect("{")?;
        let mut cells = Vec::new();
        while !self.try_consume("}") {
            cells.push(self.parse_cell()?);
        }

        self.expect("wires")?;
        self.expect("{")?;
        let mut groups = Vec::new();
        let mut continuous = Vec::new();
        while !self.try_consume("}") {
            let attributes = self.parse_attributes()?;
            self.skip_trivia();
            match self.peek_ident().as_deref() {
                Some("group") => groups.push(self.parse_group(attributes, GroupHead::Dynamic)?),
                Some("comb") => {
                    self.expect("comb")?;
                    groups.push(self.parse_group(attributes, GroupHead::Comb)?)
                }
                Some("static") if self.peek_static_group() => {
                    self.expect("static")?;
                    self.expect("<")?;
                    let latency = self.parse_number()?;
                    self.expect(">")?;
                    groups.push(self.parse_group(attributes, GroupHead::Static(latency))?)
                }
                _ => {
                    if !attributes.is_empty() {
                        return self.err("attributes are not allowed on continuous assignments");
                    }
                    continuous.push(self.parse_assignment()?);
                }
            }
        }

        self.expect("control")?;
        self.expect("{")?;
        let control = if self.try_consume("}") {
            Control::empty()
        } else {
            let stmt = self.parse_control_block()?;
            self.expect("}")?;
            stmt
        };
        self.expect("}")?;

        Ok(Component { name, inputs, outputs, cells, continuous, groups, control, span })
    }

    /// Distinguish `static<N> group` (wires section) from a control keyword.
    fn peek_static_group(&mut self) -> bool {
        let save = (self.pos, self.line, self.col);
        let ok = self.try_consume("static") && self.try_consume("<");
        (self.pos, self.line, self.col) = save;
        ok
    }

    fn parse_port_list(&mut self) -> Result<Vec<Port>, ParseError> {
        let mut ports = Vec::new();
        loop {
            self.skip_trivia();
            if self.peek() == Some(')') {
                break;
            }
            let name = self.parse_ident()?;
            self.expect(":")?;
            let width = self.parse_number()?;
            ports.push(Port { name, width });
            if !self.try_consume(",") {
                break;
            }
        }
        Ok(ports)
    }

    fn parse_attributes(&mut self) -> Result<Attributes, ParseError> {
        let mut attrs = Attributes::default();
        while self.try_consume("@") {
            let key = self.parse_ident()?;
            let value = if self.try_consume("(") {
                let v = self.parse_number()?;
                self.expect(")")?;
                Some(v)
            } else {
                None
            };
            if attrs.has(&key) {
                return self.err(format!("duplicate attribute `@{key}`"));
            }
            attrs.0.push(Attribute { key, value });
        }
        Ok(attrs)
    }

    fn parse_cell(&mut self) -> Result<Cell, ParseError> {
        let attributes = self.parse_attributes()?;
        self.skip_trivia();
        let span = self.span();
        let name = self.parse_ident()?;
        self.expect("=")?;
        let proto_name = self.parse_ident()?;
        self.expect("(")?;
        let mut args = Vec::new();
        loop {
            self.skip_trivia();
            if self.peek() == Some(')') {
                break;
            }
            args.push(self.parse_number()?);
            if !self.try_consume(",") {
                break;
            }
        }
        self.expect(")")?;
        self.expect(";")?;
        let proto = self.resolve_proto(&proto_name, &args)?;
        Ok(Cell { name, proto, attributes, span })
    }

    fn resolve_proto(&self, name: &str, args: &[u64]) -> Result<CellProto, ParseError> {
        let arity = |n: usize| -> Result<(), ParseError> {
            if args.len() == n {
                Ok(())
            } else {
                Err(ParseError {
                    line: self.line,
                    col: self.col,
                    msg: format!("`{name}` expects {n} parameter(s), got {}", args.len()),
                })
            }
        };
        let kind = match name {
            "std_reg" => {
                arity(1)?;
                PrimitiveKind::Register { width: args[0] }
            }
            "comb_mem_d1" => {
                arity(3)?;
                PrimitiveKind::CombMemD1 { width: args[0], size: args[1], idx_width: args[2] }
            }
            "std_add" => {
                arity(1)?;
                PrimitiveKind::Adder { width: args[0] }
            }
            "std_sub" => {
                arity(1)?;
                PrimitiveKind::Subtractor { width: args[0] }
            }
            "std_eq" => {
                arity(1)?;
                PrimitiveKind::Eq { width: args[0] }
            }
            "std_lt" => {
                arity(1)?;
                PrimitiveKind::Lt { width: args[0] }
            }
            "seq_mult" => {
                arity(2)?;
                PrimitiveKind::SeqMult { width: args[0], latency: args[1] }
            }
            "std_const" => {
                arity(2)?;
                PrimitiveKind::Constant { width: args[0], value: args[1] }
            }
            "std_wire" => {
                arity(1)?;
                PrimitiveKind::Wire { width: args[0] }
            }
            _ => {
                arity(0)?;
                return Ok(CellProto::Component(name.to_string()));
            }
        };
        Ok(CellProto::Primitive(kind))
    }

    fn parse_group(&mut self, attributes: Attributes, head: GroupHead) -> Result<Group, ParseError> {
        self.expect("group")?;
        self.skip_trivia();
        let span = self.span();
        let name = self.parse_ident()?;
        self.expect("{")?;
        let mut assignments = Vec::new();
        while !self.try_consume("}") {
            assignments.push(self.parse_assignment()?);
        }
        let kind = match head {
            GroupHead::Dynamic => GroupKind::Dynamic,
            GroupHead::Comb => GroupKind::Combinational,
            GroupHead::Static(latency) => GroupKind::Static { latency },
        };
        Ok(Group { name, kind, assignments, attributes, span })
    }

    fn parse_assignment(&mut self) -> Result<Assignment, ParseError> {
        self.skip_trivia();
        let span = self.span();
        let dst = self.parse_port_ref()?;
        self.expect("=")?;
        // Parse a guard expression; if a `?` follows it is the guard,
        // otherwise it must itself be the source atom.
        let expr = self.parse_guard()?;
        let (guard, src) = if self.try_consume("?") {
            let src = self.parse_atom()?;
            (expr, src)
        } else {
            match expr {
                Guard::Atom(a) => (Guard::True, a),
                _ => return self.err("expected `?` after guard expression"),
            }
        };
        self.expect(";")?;
        Ok(Assignment { dst, guard, src, span })
    }

    fn parse_port_ref(&mut self) -> Result<PortRef, ParseError> {
        let first = self.parse_ident()?;
        if self.try_consume(".") {
            let port = self.parse_ident()?;
            Ok(PortRef::Cell { cell: first, port })
        } else if self.try_consume("[") {
            let hole = self.parse_ident()?;
            self.expect("]")?;
            let hole = match hole.as_str() {
                "go" => Hole::Go,
                "done" => Hole::Done,
                other => return self.err(format!("unknown hole `{other}` (expected go/done)")),
            };
            Ok(PortRef::Hole { group: first, hole })
        } else {
            Ok(PortRef::This { port: first })
        }
    }

    fn parse_atom(&mut self) -> Result<Atom, ParseError> {
        if self.peek_is_number() {
            let width = self.parse_number()?;
            self.expect("'d")?;
            let value = self.parse_number()?;
            Ok(Atom::Lit(Literal { width, value }))
        } else {
            Ok(Atom::Port(self.parse_port_ref()?))
        }
    }

    // guard precedence: `|` < `&` < `!` < atoms/comparisons
    fn parse_guard(&mut self) -> Result<Guard, ParseError> {
        let mut lhs = self.parse_guard_and()?;
        while self.try_consume("|") {
            let rhs = self.parse_guard_and()?;
            lhs = lhs.or(rhs);
        }
        Ok(lhs)
    }

    fn parse_guard_and(&mut self) -> Result<Guard, ParseError> {
        let mut lhs = self.parse_guard_not()?;
        loop {
            // do not treat `&&` or the `&` in `!=` specially; only single `&`
            self.skip_trivia();
            if self.peek() == Some('&') {
                self.bump();
                let rhs = self.parse_guard_not()?;
                lhs = lhs.and(rhs);
            } else {
                break;
            }
        }
        Ok(lhs)
    }

    fn parse_guard_not(&mut self) -> Result<Guard, ParseError> {
        self.skip_trivia();
        if self.peek() == Some('!') && self.chars.get(self.pos + 1) != Some(&'=') {
            self.bump();
            Ok(self.parse_guard_not()?.not())
        } else {
            self.parse_guard_primary()
        }
    }

    fn parse_guard_primary(&mut self) -> Result<Guard, ParseError> {
        if self.try_consume("(") {
            let g = self.parse_guard()?;
            self.expect(")")?;
            return Ok(g);
        }
        let lhs = self.parse_atom()?;
        if self.try_consume("==") {
            let rhs = self.parse_atom()?;
            Ok(Guard::Eq(lhs, rhs))
        } else if self.try_consume("!=") {
            let rhs = self.parse_atom()?;
            Ok(Guard::Neq(lhs, rhs))
        } else {
            Ok(Guard::Atom(lhs))
        }
    }

    // --- control ---

    fn parse_control_block(&mut self) -> Result<Control, ParseError> {
        let attributes = self.parse_attributes()?;
        self.skip_trivia();
        let span = self.span();
        let Some(kw) = self.peek_ident() else {
            return self.err("expected control statement");
        };
        match kw.as_str() {
            "empty" => {
                self.expect("empty")?;
                self.expect(";")?;
                Ok(Control::Empty { attributes })
            }
            "seq" => {
                self.expect("seq")?;
                let children = self.parse_control_children()?;
                Ok(Control::Seq { children, attributes })
            }
            "par" => {
                self.expect("par")?;
                let children = self.parse_control_children()?;
                Ok(Control::Par { children, attributes })
            }
            "static" => {
                self.expect("static")?;
                self.expect("<")?;
                let latency = self.parse_number()?;
                self.expect(">")?;
                if self.try_consume("seq") {
                    let children = self.parse_control_children()?;
                    Ok(Control::StaticSeq { latency, children, attributes })
                } else if self.try_consume("par") {
                    let children = self.parse_control_children()?;
                    Ok(Control::StaticPar { latency, children, attributes })
                } else {
                    self.err("expected `seq` or `par` after `static<N>`")
                }
            }
            "if" => {
                self.expect("if")?;
                let cond = self.parse_port_ref()?;
                let with = if self.try_consume("with") { Some(self.parse_ident()?) } else { None };
                let then = self.parse_control_body()?;
                let els = if self.try_consume("else") {
                    self.parse_control_body()?
                } else {
                    Control::empty()
                };
                Ok(Control::If {
                    cond,
                    with,
                    then: Box::new(then),
                    els: Box::new(els),
                    attributes,
                })
            }
            "while" => {
                self.expect("while")?;
                let cond = self.parse_port_ref()?;
                let with = if self.try_consume("with") { Some(self.parse_ident()?) } else { None };
                let body = self.parse_control_body()?;
                Ok(Control::While { cond, with, body: Box::new(body), attributes })
            }
            _ => {
                let group = self.parse_ident()?;
                self.expect(";")?;
                Ok(Control::Enable { group, attributes, span })
            }
        }
    }

    fn parse_control_children(&mut self) -> Result<Vec<Control>, ParseError> {
        self.expect("{")?;
        let mut children = Vec::new();
        while !self.try_consume("}") {
            children.push(self.parse_control_block()?);
        }
        Ok(children)
    }

    /// An if/while body: zero statements parse as Empty, several as a Seq.
    fn parse_control_body(&mut self) -> Result<Control, ParseError> {
        let mut children = self.parse_control_children()?;
        Ok(match children.len() {
            0 => Control::empty(),
            1 => children.remove(0),
            _ => Control::Seq { children, attributes: Attributes::default() },
        })
    }
}

enum GroupHead {
    Dynamic,
    Comb,
    Static(u64),
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_component() {
        let p = parse("component main()->(){cells{}wires{}control{}}").unwrap();
        assert_eq!(p.components.len(), 1);
        assert_eq!(p.components[0].name, "main");
        assert!(p.components[0].control.is_empty());
    }

    #[test]
    fn group_with_done_hole() {
        let src = r#"
component main() -> () {
  cells { r = std_reg(32); }
  wires {
    group read {
      r.in = 32'd7;
      r.write_en = 1'd1;
      read[done] = r.done;
    }
  }
  control { read; }
}
"#;
        let p = parse(src).unwrap();
        let main = p.main().unwrap();
        let g = main.group("read").unwrap();
        assert_eq!(g.assignments.len(), 3);
        assert!(g.done_assignment().is_some());
        assert!(matches!(main.control, Control::Enable { ref group, .. } if group == "read"));
    }

    #[test]
    fn guarded_assignment_and_literals() {
        let src = r#"
component main() -> () {
  cells { m = seq_mult(32, 3); r = std_reg(32); }
  wires {
    group my {
      m.go = !m.done ? 1'd1;
      r.in = m.out;
      r.write_en = m.done ? 1'd1;
      my[done] = r.done;
    }
  }
  control { my; }
}
"#;
        let p = parse(src).unwrap();
        let g = &p.main().unwrap().groups[0];
        assert!(matches!(g.assignments[0].guard, Guard::Not(_)));
        assert_eq!(g.assignments[0].src, Atom::Lit(Literal { width: 1, value: 1 }));
    }

    #[test]
    fn error_carries_position() {
        let err = parse("component main()->(){cells{ x = }wires{}control{}}").unwrap_err();
        assert!(err.line >= 1 && err.col > 1, "position missing: {err}");
    }

    #[test]
    fn attributes_on_cells_and_control() {
        let src = r#"
component main() -> () {
  cells { @external mem = comb_mem_d1(32, 1, 1); }
  wires {}
  control { @id(3) seq { } }
}
"#;
        let p = parse(src).unwrap();
        let main = p.main().unwrap();
        assert!(main.cells[0].attributes.has("external"));
        assert_eq!(main.control.attributes().num("id"), Some(3));
    }
}
