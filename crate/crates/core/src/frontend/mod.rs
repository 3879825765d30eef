//! Lexing, parsing and pretty-printing of `.csl` sources.

pub mod ast;
pub mod lexer;
mod parser;
mod pretty;

pub use ast::*;
pub use parser::{parse, parse_expr};
pub use pretty::{expr_to_string, pretty_print};

#[cfg(test)]
mod tests {
    use super::*;

    const CASINO: &str = "\
public type Casino is {
    Address address,           State state,
    Address operator,         uint256 pot,
    uint256 timeout,          uint256 secretNumber,
    Address player,           Wager wager,
    Message msg,             Block block,
    Transaction tx,          bool destroyed
}
where state == BET_PLACED ==> pot + wager.value == address.balance
where state != BET_PLACED ==> pot == address.balance
where operator.address != address.address
where player.address != address.address
where msg.sender.address != address.address
where block.coinbase.address != address.address
where tx.origin.address != address.address
";

    const PLAYER_WINS: &str = "\
function playerWins(Casino casino) -> (Casino out)
requires inState(casino, BET_PLACED)
requires casino.wager.value * 2 <= casino.address.balance
requires casino.wager.value * 2 + casino.player.balance < MAX256
ensures out.pot == casino.pot - casino.wager.value
ensures out.player.balance == casino.player.balance + casino.wager.value * 2
ensures out.wager.value == 0
ensures out.address.balance == casino.address.balance - casino.wager.value * 2:
    (Address a1, Address a2) = transfer(casino.player, casino.address, casino.wager.value * 2)
    (casino.player, casino.address, casino.pot, casino.wager.value) = 
        (a1, a2, casino.pot - casino.wager.value, 0)
    return casino
";

    #[test]
    fn record_type_with_where_clauses() {
        let m = parse("t.csl", CASINO).unwrap();
        assert_eq!(m.decls.len(), 1);
        let DeclKind::Type(t) = &m.decls[0].kind else { panic!() };
        assert_eq!(t.visibility, Visibility::Public);
        let TypeBody::Record(fields) = &t.body else { panic!() };
        assert_eq!(fields.len(), 12);
        assert_eq!(t.where_clauses.len(), 7);
    }

    #[test]
    fn empty_module() {
        assert!(parse("e.csl", "").unwrap().decls.is_empty());
        assert!(parse("e.csl", "// only a comment\n\n").unwrap().decls.is_empty());
    }

    #[test]
    fn function_clauses_and_body() {
        let m = parse("f.csl", PLAYER_WINS).unwrap();
        let DeclKind::Function(f) = &m.decls[0].kind else {
            panic!()
        };
        assert_eq!(f.requires.len(), 3);
        assert_eq!(f.ensures.len(), 4);
        assert_eq!(f.body.len(), 3);
        assert_eq!(f.returns.len(), 1);
        assert!(matches!(&f.body[1].kind, StmtKind::Assign { targets, .. } if targets.len() == 4));
    }

    #[test]
    fn loops_are_rejected() {
        let src = "function f(int x) -> (int y):\n    while x > 0:\n        x = x - 1\n    return x\n";
        let err = parse("l.csl", src).unwrap_err();
        assert!(err.mentions("loops unsupported"), "{err}");
    }

    #[test]
    fn unknown_declaration_is_reported_with_position() {
        let err = parse("u.csl", "const A = 1\nmethod f()\nconst B = 2\nconst C = \n").unwrap_err();
        assert_eq!(err.len(), 2, "{err}");
        assert_eq!(err.0[0].span.span.start_line, 2);
        assert!(err.0[0].message.contains("syntax error"));
    }

    #[test]
    fn pow_only_in_constants() {
        assert!(parse("p.csl", "const M = 2 ** 256 - 1\n").is_ok());
        let err = parse("p.csl", "property p(int x) => x ** 2 > 0\n").unwrap_err();
        assert!(err.mentions("**"));
    }

    #[test]
    fn precedence_and_associativity() {
        let e = parse_expr("e", "a ==> b ==> c || d && e").unwrap();
        assert_eq!(expr_to_string(&e), "a ==> b ==> c || d && e");
        let ExprKind::Binary(BinaryOp::Implies, _, r) = &e.kind else {
            panic!()
        };
        assert!(matches!(r.kind, ExprKind::Binary(BinaryOp::Implies, ..)));
        let e = parse_expr("e", "(a - b) - c - (d - e)").unwrap();
        assert_eq!(expr_to_string(&e), "a - b - c - (d - e)");
        let e = parse_expr("e", "-(x.f) * !(p && q)").unwrap();
        assert_eq!(expr_to_string(&e), "-x.f * !(p && q)");
    }

    #[test]
    fn statements_round_trip() {
        let src = "\
function f(int a, bool b) -> (int r, int s)
requires a > 0:
    int x = a
    int y
    (Pair p, int q) = g(a, {left: 1, right: 2})
    if b:
        y = 1
    else if a > 3:
        y = 2
    else:
        y = 3
    (x, p.left) = (p.left, x)
    return (x, y)
";
        let m = parse("r.csl", src).unwrap();
        let printed = pretty_print(&m);
        assert_eq!(printed, src);
    }

    #[test]
    fn printing_is_idempotent_on_examples() {
        for src in [CASINO, PLAYER_WINS] {
            let m = parse("x.csl", src).unwrap();
            let once = pretty_print(&m);
            let m2 = parse("x.csl", &once).unwrap();
            assert_eq!(m.without_spans(), m2.without_spans());
            assert_eq!(pretty_print(&m2), once);
        }
    }

    #[test]
    fn spans_are_one_based() {
        let m = parse("s.csl", "\nconst A = 1\n").unwrap();
        let s = m.decls[0].span;
        assert_eq!((s.start_line, s.start_col), (2, 1));
        assert_eq!((s.end_line, s.end_col), (2, 11));
    }
}
