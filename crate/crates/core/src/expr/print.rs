use super::Node;

// Binding strength, matching the grammar levels.
const SUM: u8 = 1;
const PRODUCT: u8 = 2;
const UNARY: u8 = 3;
const POWER: u8 = 4;
const ATOM: u8 = 5;

fn level(n: &Node) -> u8 {
    match n {
        Node::Add(..) | Node::Sub(..) => SUM,
        Node::Mul(..) | Node::Div(..) => PRODUCT,
        Node::Neg(_) => UNARY,
        Node::Pow(..) => POWER,
        Node::Const(_) | Node::Var(_) | Node::Call(..) => ATOM,
    }
}

pub(super) fn render(n: &Node, names: &[String]) -> String {
    let mut out = String::new();
    write(n, &|i| names[i].clone(), &mut out);
    out
}

/// Render without a chart; variables print as `x0`, `x1`, ...
pub(super) fn render_anon(n: &Node) -> String {
    let mut out = String::new();
    write(n, &|i| format!("x{i}"), &mut out);
    out
}

fn wrapped(n: &Node, parens: bool, name: &dyn Fn(usize) -> String, out: &mut String) {
    if parens {
        out.push('(');
        write(n, name, out);
        out.push(')');
    } else {
        write(n, name, out);
    }
}

fn write(n: &Node, name: &dyn Fn(usize) -> String, out: &mut String) {
    match n {
        Node::Const(c) => {
            if c.is_sign_negative() {
                out.push_str(&format!("(-{})", -c));
            } else {
                out.push_str(&format!("{c}"));
            }
        }
        Node::Var(i) => out.push_str(&name(*i)),
        Node::Neg(a) => {
            out.push('-');
            wrapped(a, level(a) < UNARY, name, out);
        }
        Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
            let (op, lvl) = match n {
                Node::Add(..) => (" + ", SUM),
                Node::Sub(..) => (" - ", SUM),
                Node::Mul(..) => ("*", PRODUCT),
                _ => ("/", PRODUCT),
            };
            wrapped(a, level(a) < lvl, name, out);
            out.push_str(op);
            wrapped(b, level(b) <= lvl, name, out);
        }
        Node::Pow(a, b) => {
            wrapped(a, level(a) < ATOM, name, out);
            out.push('^');
            wrapped(b, level(b) < UNARY, name, out);
        }
        Node::Call(f, a) => {
            out.push_str(f.name());
            out.push('(');
            write(a, name, out);
            out.push(')');
        }
    }
}
