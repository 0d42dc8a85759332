//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage or malformed input, 2 hypothesis or
//! validation failure, 3 internal inconsistency detected (oracle
//! disagreement or a negative expanded exponent), 4 resource budget exceeded.

use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use serde_json::{json, Value};

use nilmult::fng::{NilpotentContext, NormalWord};
use nilmult::hall::{CommutatorTree, HallBasis};
use nilmult::multipliers::{self, AbelianInvariants, ClassRow, GroupSpec, TwoRowAudit};
use nilmult::oracle::{self, OracleMode};
use nilmult::witt;
use nilmult::{Budget, Error};

#[derive(Parser)]
#[command(
    name = "nilmult",
    version,
    about = "Nilpotent and polynilpotent multipliers of nilpotent products of cyclic groups",
    long_about = "Computes Baer invariants of nth nilpotent products of cyclic groups from \
closed-form Witt-function formulas, and verifies them against an independent oracle built \
from Hall basis enumeration, commutator collection, and Smith normal form."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output format for results on stdout
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,

    /// Cap on generated Hall basis elements (default 500000)
    #[arg(long, global = true, env = "NILMULT_MAX_BASIS_ELEMENTS")]
    max_basis_elements: Option<usize>,

    /// Cap on intermediate word length during collection (default 1000000)
    #[arg(long, global = true, env = "NILMULT_MAX_WORD_SYMBOLS")]
    max_word_symbols: Option<usize>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum CollectOp {
    /// Product of the given words
    Multiply,
    /// Left-normed commutator [w1, w2, ..., wk]
    Commutator,
    /// First word raised to --exponent
    Power,
}

#[derive(Clone, Copy, ValueEnum)]
enum OracleArg {
    Basis,
    Collected,
    Both,
}

#[derive(Subcommand)]
enum Command {
    /// Number of basic commutators of a given weight on a given alphabet:
    /// the Witt formula chi_w(d) = (1/w) sum_{m|w} mu(m) d^(w/m)
    Chi {
        /// Commutator weight w >= 1
        #[arg(long)]
        weight: u64,
        /// Alphabet size d >= 0
        #[arg(long)]
        letters: u64,
    },

    /// List the ordered Hall basis of basic commutators up to a weight bound
    Basis {
        #[arg(long)]
        letters: u32,
        #[arg(long)]
        max_weight: u32,
        /// Restrict the listing to one weight layer
        #[arg(long)]
        weight: Option<u32>,
    },

    /// Collect words of a free nilpotent group into normal form over the
    /// Hall basis (multiply, left-normed commutator, or power)
    Collect {
        #[arg(long)]
        letters: u32,
        /// Nilpotency class of the ambient free nilpotent group
        #[arg(long)]
        class: u32,
        #[arg(long, value_enum, default_value_t = CollectOp::Multiply)]
        op: CollectOp,
        /// Exponent for --op power (any integer)
        #[arg(long, allow_hyphen_values = true)]
        exponent: Option<String>,
        /// Words as products of basic commutators, e.g. "x2^3 [x2,x1]^-1"
        #[arg(required = true)]
        words: Vec<String>,
    },

    /// The c-nilpotent multiplier of Z^(*n m) *n Z_{r_1} *n ... *n Z_{r_t}:
    /// Z^(d_m) + Z_{r_1}^(d_{m+1}-d_m) + ... with d_k = sum_{i=1..n} chi_{c+i}(k),
    /// for a divisibility chain r_{i+1} | r_i, c >= n, and every prime p <= n
    /// coprime to r_1
    Nilmult {
        /// Number m of infinite cyclic factors
        #[arg(long, default_value_t = 0)]
        free_rank: u32,
        /// Torsion orders r_1,r_2,... as a comma-separated descending chain
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        orders: Vec<u64>,
        /// Product class n
        #[arg(long)]
        product_class: u32,
        /// Multiplier class c >= n
        #[arg(long)]
        class: u32,
    },

    /// The polynilpotent multiplier with class row (c_1,...,c_s): as nilmult
    /// but with the multiplicities pushed through iterated Witt functions
    /// chi_{c_s+1}(... chi_{c_2+1}(sum chi_{c_1+i}(k)) ...)
    Polymult {
        #[arg(long, default_value_t = 0)]
        free_rank: u32,
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        orders: Vec<u64>,
        #[arg(long)]
        product_class: u32,
        /// Class row c1,c2,... with c1 >= product class
        #[arg(long, value_delimiter = ',', required = true)]
        class_row: Vec<u32>,
    },

    /// The c-nilpotent multiplier of Z_{s1} *n Z_{s2} *n Z_{s3} for
    /// arbitrary orders coprime to all primes <= n, expressed through the
    /// gcds (s1,s2), (s2,s3), (s1,s3), (s1,s2,s3); with --two-row, the
    /// expanded two-row expression is evaluated verbatim and audited
    Threefactor {
        /// Exactly three orders s1,s2,s3
        #[arg(long, value_delimiter = ',', required = true)]
        orders: Vec<u64>,
        #[arg(long)]
        product_class: u32,
        /// Multiplier class c >= n (single-row formula)
        #[arg(long, conflicts_with = "two_row")]
        class: Option<u32>,
        /// Class row c1,c2 for the audited two-row formula
        #[arg(long, value_delimiter = ',')]
        two_row: Option<Vec<u32>>,
    },

    /// Check the closed-form c-nilpotent multiplier against the independent
    /// oracle: the quotient of the free abelian group on basic commutators
    /// of weights c+1..c+n by the relation lattice, via Smith normal form
    Verify {
        #[arg(long, default_value_t = 0)]
        free_rank: u32,
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        orders: Vec<u64>,
        #[arg(long)]
        product_class: u32,
        #[arg(long)]
        class: u32,
        /// Which relation-lattice builder(s) to run
        #[arg(long, value_enum, default_value_t = OracleArg::Both)]
        oracle: OracleArg,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Usage problems exit 1; codes 2-4 are reserved for semantic
            // failures. --help / --version still exit 0.
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let mut budget = Budget::default();
    if let Some(cap) = cli.max_basis_elements {
        budget.max_basis_elements = cap;
    }
    if let Some(cap) = cli.max_word_symbols {
        budget.max_word_symbols = cap;
    }
    match run(cli.command, cli.format, &budget) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Domain(_) => 1,
                Error::Validation(_) => 2,
                Error::Inconsistency(_) => 3,
                Error::Budget(_) => 4,
            })
        }
    }
}

fn run(command: Command, format: Format, budget: &Budget) -> Result<u8, Error> {
    match command {
        Command::Chi { weight, letters } => {
            if weight < 1 {
                return Err(Error::Domain("weight must be at least 1".into()));
            }
            let chi = witt::witt_chi(weight, letters);
            emit(
                format,
                || chi.to_string(),
                || json!({"weight": weight, "letters": letters, "chi": chi.to_string()}),
            );
            Ok(0)
        }

        Command::Basis {
            letters,
            max_weight,
            weight,
        } => {
            let basis = HallBasis::generate(letters, max_weight, budget)?;
            if let Some(w) = weight {
                if w < 1 || w > max_weight {
                    return Err(Error::Domain(format!(
                        "weight filter {w} outside 1..={max_weight}"
                    )));
                }
            }
            let (lo, hi) = match weight {
                Some(w) => basis.layer_range(w),
                None => (0, basis.len()),
            };
            match format {
                Format::Text => {
                    for pos in lo..hi {
                        let c = basis.element(pos);
                        println!("{pos}: {} (weight {})", basis.render(c), basis.weight(c));
                    }
                }
                Format::Json => {
                    let elements: Vec<Value> = (lo..hi)
                        .map(|pos| {
                            let c = basis.element(pos);
                            json!({
                                "index": pos,
                                "weight": basis.weight(c),
                                "commutator": basis.to_json(c),
                            })
                        })
                        .collect();
                    print_json(json!({
                        "letters": letters,
                        "max_weight": max_weight,
                        "count": hi - lo,
                        "elements": elements,
                    }));
                }
            }
            Ok(0)
        }

        Command::Collect {
            letters,
            class,
            op,
            exponent,
            words,
        } => {
            let ctx = NilpotentContext::new(letters, class, budget.clone())?;
            let parsed: Vec<NormalWord> = words
                .iter()
                .map(|w| parse_word(&ctx, w))
                .collect::<Result<_, Error>>()?;
            let result = match op {
                CollectOp::Multiply => {
                    let mut acc = parsed[0].clone();
                    for w in &parsed[1..] {
                        acc = ctx.multiply(&acc, w)?;
                    }
                    acc
                }
                CollectOp::Commutator => {
                    if parsed.len() < 2 {
                        return Err(Error::Domain(
                            "--op commutator needs at least two words".into(),
                        ));
                    }
                    ctx.commutator_chain(&parsed[0], &parsed[1..])?
                }
                CollectOp::Power => {
                    if parsed.len() != 1 {
                        return Err(Error::Domain("--op power takes exactly one word".into()));
                    }
                    let e: BigInt = exponent
                        .as_deref()
                        .ok_or_else(|| Error::Domain("--op power requires --exponent".into()))?
                        .parse()
                        .map_err(|_| Error::Domain("exponent must be an integer".into()))?;
                    ctx.power(&parsed[0], &e)?
                }
            };
            match format {
                Format::Text => println!("{}", ctx.render(&result)),
                Format::Json => {
                    let terms: Vec<Value> = result
                        .terms()
                        .iter()
                        .map(|(pos, e)| {
                            json!({
                                "commutator": ctx.basis().to_json(ctx.basis().element(*pos)),
                                "exponent": e.to_string(),
                            })
                        })
                        .collect();
                    print_json(json!({
                        "letters": letters,
                        "class": class,
                        "result": terms,
                        "rendered": ctx.render(&result),
                    }));
                }
            }
            Ok(0)
        }

        Command::Nilmult {
            free_rank,
            orders,
            product_class,
            class,
        } => {
            let spec = GroupSpec::new(free_rank, orders, product_class);
            let group = multipliers::nilpotent_multiplier(&spec, class)?;
            emit_group(format, &group)?;
            Ok(0)
        }

        Command::Polymult {
            free_rank,
            orders,
            product_class,
            class_row,
        } => {
            let spec = GroupSpec::new(free_rank, orders, product_class);
            let row = ClassRow::new(class_row)?;
            let group = multipliers::polynilpotent_multiplier(&spec, &row)?;
            emit_group(format, &group)?;
            Ok(0)
        }

        Command::Threefactor {
            orders,
            product_class,
            class,
            two_row,
        } => {
            let [s1, s2, s3]: [u64; 3] = orders.as_slice().try_into().map_err(|_| {
                Error::Domain("threefactor requires exactly three orders".into())
            })?;
            match (class, two_row) {
                (Some(c), None) => {
                    let group =
                        multipliers::three_factor_multiplier(s1, s2, s3, product_class, c)?;
                    emit_group(format, &group)?;
                    Ok(0)
                }
                (None, Some(row)) => {
                    let [c1, c2]: [u32; 2] = row.as_slice().try_into().map_err(|_| {
                        Error::Domain("--two-row takes exactly two classes c1,c2".into())
                    })?;
                    let audit =
                        multipliers::three_factor_two_row(s1, s2, s3, product_class, c1, c2)?;
                    emit_audit(format, &audit)?;
                    Ok(if audit.is_consistent() { 0 } else { 3 })
                }
                _ => Err(Error::Domain(
                    "threefactor requires exactly one of --class or --two-row".into(),
                )),
            }
        }

        Command::Verify {
            free_rank,
            orders,
            product_class,
            class,
            oracle: which,
        } => {
            let spec = GroupSpec::new(free_rank, orders, product_class);
            let mode = match which {
                OracleArg::Basis => OracleMode::Basis,
                OracleArg::Collected => OracleMode::Collected,
                OracleArg::Both => OracleMode::Both,
            };
            let report = oracle::verify_formula(&spec, class, mode, budget)?;
            match format {
                Format::Text => {
                    println!("formula: {}", report.formula);
                    if let Some(g) = &report.oracle_basis {
                        println!("oracle[basis]: {g}");
                    }
                    if let Some(g) = &report.oracle_collected {
                        println!("oracle[collected]: {g}");
                    }
                    println!(
                        "equal: {} (ambient rank {}, {} relation columns, {} ms)",
                        if report.equal { "yes" } else { "NO" },
                        report.ambient_rank,
                        report.relation_columns,
                        report.runtime_ms
                    );
                }
                Format::Json => print_json(report.to_json()?),
            }
            Ok(if report.equal { 0 } else { 3 })
        }
    }
}

fn emit(format: Format, text: impl Fn() -> String, value: impl Fn() -> Value) {
    match format {
        Format::Text => println!("{}", text()),
        Format::Json => print_json(value()),
    }
}

fn print_json(v: Value) {
    println!("{}", serde_json::to_string(&v).expect("serializable"));
}

fn emit_group(format: Format, group: &AbelianInvariants) -> Result<(), Error> {
    match format {
        Format::Text => println!("{group}"),
        Format::Json => print_json(group.to_json()?),
    }
    Ok(())
}

fn emit_audit(format: Format, audit: &TwoRowAudit) -> Result<(), Error> {
    match format {
        Format::Text => {
            for (i, e) in audit.exponents.iter().enumerate() {
                println!("e{} = {e}", i + 1);
            }
            println!("expanded-expression total torsion multiplicity = {}", audit.expanded_total);
            println!("iterated-chi total torsion multiplicity = {}", audit.reference_total);
            let names = |ix: &[usize]| -> String {
                if ix.is_empty() {
                    "none".to_string()
                } else {
                    ix.iter()
                        .map(|i| format!("e{i}"))
                        .collect::<Vec<_>>()
                        .join(", ")
                }
            };
            println!("negative expanded exponents: {}", names(&audit.negative));
            println!(
                "negative exponents relevant here: {}",
                names(&audit.relevant_negative)
            );
            println!(
                "totals match: {}",
                if audit.total_mismatch { "NO" } else { "yes" }
            );
            if let Some(ok) = audit.equal_orders_check {
                println!("equal-orders cross-check: {}", if ok { "yes" } else { "NO" });
            }
            match &audit.group {
                Some(g) => println!("group: {g}"),
                None => println!("group: not emitted (negative expanded exponent)"),
            }
        }
        Format::Json => {
            let group = match &audit.group {
                Some(g) => g.to_json()?,
                None => Value::Null,
            };
            print_json(json!({
                "e": audit
                    .exponents
                    .iter()
                    .map(|e| e.to_string())
                    .collect::<Vec<_>>(),
                "expanded_total": audit.expanded_total.to_string(),
                "reference_total": audit.reference_total.to_string(),
                "negative": audit.negative,
                "relevant_negative": audit.relevant_negative,
                "total_mismatch": audit.total_mismatch,
                "equal_orders_check": audit.equal_orders_check,
                "group": group,
            }));
        }
    }
    Ok(())
}

/// Parses a word: whitespace-separated factors `atom` or `atom^exp`, where
/// an atom is a letter `xN` or a bracket tree `[...,...]` naming a basic
/// commutator of the context's basis.
fn parse_word(ctx: &NilpotentContext, input: &str) -> Result<NormalWord, Error> {
    let mut terms: Vec<(usize, BigInt)> = Vec::new();
    for token in split_factors(input)? {
        let (atom, exp) = match token.rsplit_once('^') {
            Some((atom, exp)) if !exp.contains(']') => {
                let e: BigInt = exp.parse().map_err(|_| {
                    Error::Domain(format!("bad exponent {exp:?} in factor {token:?}"))
                })?;
                (atom, e)
            }
            _ => (token.as_str(), BigInt::from(1)),
        };
        let tree: CommutatorTree = atom.parse()?;
        let c = ctx.basis().find(&tree).ok_or_else(|| {
            Error::Domain(format!(
                "{atom} is not a basic commutator on {} letters within class {}",
                ctx.basis().letters(),
                ctx.class()
            ))
        })?;
        terms.push((ctx.basis().position(c), exp));
    }
    ctx.word(&terms)
}

/// Splits on whitespace at bracket depth zero only.
fn split_factors(input: &str) -> Result<Vec<String>, Error> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    let mut depth = 0i32;
    for ch in input.chars() {
        match ch {
            '[' => {
                depth += 1;
                current.push(ch);
            }
            ']' => {
                depth -= 1;
                if depth < 0 {
                    return Err(Error::Domain("unbalanced ']' in word".into()));
                }
                current.push(ch);
            }
            c if c.is_whitespace() && depth == 0 => {
                if !current.is_empty() {
                    tokens.push(std::mem::take(&mut current));
                }
            }
            c => current.push(c),
        }
    }
    if depth != 0 {
        return Err(Error::Domain("unbalanced '[' in word".into()));
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    if tokens.is_empty() {
        return Err(Error::Domain("empty word".into()));
    }
    Ok(tokens)
}
