//! Seeded generation of closed fuzz programs.
//!
//! Programs draw on the seven primitive operators plus `label`/`lambda`
//! application over a small symbol pool, and reference only symbols bound
//! by an enclosing `lambda`, so they evaluate in the empty environment.
//! Many legitimately fail (car of an atom, a fallen-through cond); the
//! generator biases list-consuming operators toward list-shaped arguments
//! so a healthy share succeeds. Same seed, same corpus.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::sexpr::{Expr, Symbol};

#[derive(Clone, Copy, Debug)]
pub struct CorpusOptions {
    pub seed: u64,
    pub count: usize,
    /// Maximum nesting depth of generated programs.
    pub max_depth: usize,
}

impl Default for CorpusOptions {
    fn default() -> CorpusOptions {
        CorpusOptions { seed: 0x5EED, count: 600, max_depth: 6 }
    }
}

/// Generates `options.count` closed programs.
pub fn generate_programs(options: &CorpusOptions) -> Vec<Expr> {
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    (0..options.count)
        .map(|_| gen_program(&mut rng, options.max_depth, &mut Vec::new()))
        .collect()
}

const DATA_SYMBOLS: [&str; 4] = ["A", "B", "C", "D"];
const PARAM_SYMBOLS: [&str; 3] = ["X", "Y", "Z"];

fn sym(rng: &mut ChaCha8Rng, pool: &[&str]) -> Expr {
    Expr::symbol(pool[rng.random_range(0..pool.len())])
}

/// A quotable datum: atoms and small lists.
fn gen_datum(rng: &mut ChaCha8Rng, depth: usize) -> Expr {
    match rng.random_range(0..10u32) {
        0..=3 => sym(rng, &DATA_SYMBOLS),
        4..=5 => Expr::Int(rng.random_range(0..3)),
        6 => Expr::Nil,
        _ if depth == 0 => sym(rng, &DATA_SYMBOLS),
        _ => {
            let len = rng.random_range(1..=3);
            Expr::list((0..len).map(|_| gen_datum(rng, depth - 1)).collect())
        }
    }
}

/// A datum guaranteed to be a non-empty list.
fn gen_list_datum(rng: &mut ChaCha8Rng) -> Expr {
    let len = rng.random_range(1..=3);
    Expr::list((0..len).map(|_| gen_datum(rng, 1)).collect())
}

/// An expression likely (not certain) to evaluate to a list.
fn gen_listy(rng: &mut ChaCha8Rng, depth: usize, scope: &mut Vec<Symbol>) -> Expr {
    if rng.random_bool(0.7) {
        Expr::quoted(gen_list_datum(rng))
    } else {
        gen_program(rng, depth, scope)
    }
}

fn gen_leaf(rng: &mut ChaCha8Rng, scope: &[Symbol]) -> Expr {
    if !scope.is_empty() && rng.random_bool(0.4) {
        Expr::Sym(scope[rng.random_range(0..scope.len())].clone())
    } else {
        Expr::quoted(gen_datum(rng, 2))
    }
}

fn gen_program(rng: &mut ChaCha8Rng, depth: usize, scope: &mut Vec<Symbol>) -> Expr {
    if depth == 0 {
        return gen_leaf(rng, scope);
    }
    let next = depth - 1;
    match rng.random_range(0..100u32) {
        0..=17 => gen_leaf(rng, scope),
        18..=27 => Expr::list(vec![Expr::symbol("ATOM"), gen_program(rng, next, scope)]),
        28..=37 => Expr::list(vec![Expr::symbol("CAR"), gen_listy(rng, next, scope)]),
        38..=46 => Expr::list(vec![Expr::symbol("CDR"), gen_listy(rng, next, scope)]),
        47..=57 => Expr::list(vec![
            Expr::symbol("CONS"),
            gen_program(rng, next, scope),
            gen_listy(rng, next, scope),
        ]),
        58..=67 => Expr::list(vec![
            Expr::symbol("EQ"),
            gen_program(rng, next, scope),
            gen_program(rng, next, scope),
        ]),
        68..=81 => gen_cond(rng, next, scope),
        82..=93 => gen_lambda_app(rng, next, scope, None),
        _ => gen_label_app(rng, next, scope),
    }
}

fn gen_cond(rng: &mut ChaCha8Rng, depth: usize, scope: &mut Vec<Symbol>) -> Expr {
    let mut items = vec![Expr::symbol("COND")];
    for _ in 0..rng.random_range(0..=2u32) {
        items.push(Expr::list(vec![
            gen_program(rng, depth.min(2), scope),
            gen_program(rng, depth, scope),
        ]));
    }
    // usually close with a clause whose test cannot fail
    if rng.random_bool(0.8) {
        items.push(Expr::list(vec![
            Expr::quoted(Expr::truth()),
            gen_program(rng, depth, scope),
        ]));
    }
    Expr::list(items)
}

fn gen_lambda_app(
    rng: &mut ChaCha8Rng,
    depth: usize,
    scope: &mut Vec<Symbol>,
    self_name: Option<&Symbol>,
) -> Expr {
    let arity = rng.random_range(0..=2usize);
    let params: Vec<Symbol> = PARAM_SYMBOLS[..arity].iter().map(|s| Symbol::new(s)).collect();
    let args: Vec<Expr> = (0..arity).map(|_| gen_program(rng, depth, scope)).collect();

    let mut inner = params.clone();
    if let Some(name) = self_name {
        inner.push(name.clone());
    }
    scope.append(&mut inner.clone());
    let body = gen_program(rng, depth, scope);
    scope.truncate(scope.len() - inner.len());

    let lambda = Expr::list(vec![
        Expr::symbol("LAMBDA"),
        Expr::list(params.into_iter().map(Expr::Sym).collect()),
        body,
    ]);
    let mut items = vec![lambda];
    items.extend(args);
    Expr::list(items)
}

fn gen_label_app(rng: &mut ChaCha8Rng, depth: usize, scope: &mut Vec<Symbol>) -> Expr {
    let name = Symbol::new("F");
    let app = gen_lambda_app(rng, depth, scope, Some(&name));
    let items = app.elements();
    let labelled = Expr::list(vec![
        Expr::symbol("LABEL"),
        Expr::Sym(name),
        items[0].clone(),
    ]);
    let mut all = vec![labelled];
    all.extend_from_slice(&items[1..]);
    Expr::list(all)
}

// ---------------------------------------------------------------------------
// Arbitrary expressions (not programs) for reader/printer checks
// ---------------------------------------------------------------------------

const NAME_POOL: [&str; 14] = [
    "A", "B", "MY-LAST", "NULL.", "LAMBDA", "+", "-", "*", "/", "<", ">=", "X?", "Y!", "F2",
];

/// A random well-formed expression, atoms and lists alike.
pub fn random_expr(rng: &mut ChaCha8Rng, depth: usize) -> Expr {
    match rng.random_range(0..10u32) {
        0..=2 => sym(rng, &NAME_POOL),
        3..=4 => Expr::Int(rng.random::<i64>()),
        5 => Expr::Nil,
        _ if depth == 0 => sym(rng, &NAME_POOL),
        _ => {
            let len = rng.random_range(0..=4);
            Expr::list((0..len).map(|_| random_expr(rng, depth - 1)).collect())
        }
    }
}

/// Seeded stream of [`random_expr`] values.
pub fn random_exprs(seed: u64, count: usize, depth: usize) -> Vec<Expr> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_expr(&mut rng, depth)).collect()
}
