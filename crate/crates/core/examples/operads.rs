//! Built-in modular operads, decorations, evaluation and the axiom checker.

use modgraph::corpus;
use modgraph::decoration::{decoration_count, decorations, evaluate};
use modgraph::operad::{builtin, BUILTIN_NAMES};
use modgraph::validate::{validate_modular_operad, ValidateOptions};

fn main() {
    for name in BUILTIN_NAMES {
        // The tensor operad has 4^n elements in arity n; arity 3 keeps it quick.
        let arity = if *name == "tensor" { 3 } else { 4 };
        let opts = ValidateOptions { max_arity: arity, full_perm_arity: 3 };
        let p = builtin(name, arity).unwrap();
        let r = validate_modular_operad(p.as_ref(), &opts);
        println!("{name:>18}: colours={} valid={} ({} instances)", p.colour_count(), r.valid, r.instances_checked);
        if let Some(f) = r.failures.first() {
            println!("{:>18}  first failure: {f:?}", "");
        }
    }

    let p = builtin("charge", 6).unwrap();
    let g = corpus::joined_stars(3, 3);
    println!("charge decorations of two joined 3-stars: {}", decoration_count(p.as_ref(), &g));
    for d in decorations(p.as_ref(), &g).iter().take(4) {
        let (profile, label) = evaluate(p.as_ref(), &g, d).unwrap();
        let labels: Vec<_> = d.labels.iter().map(|l| l.elem).collect();
        println!("  labels {labels:?} evaluate to {} on profile {profile:?}", label.elem);
    }
}
