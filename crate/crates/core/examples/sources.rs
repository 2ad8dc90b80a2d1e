//! Santha–Vazirani and MDL sources: conversion between the two, sampling,
//! history audit, and the min-entropy of a seed.

use std::collections::HashMap;

use randamp::rng::{Domain, Streams};
use randamp::sources::{draw_seed, sample_pair, seed_min_entropy, sv_to_mdl, SourceKind, SourceModel, SvParams};

fn main() -> randamp::Result<()> {
    let sv = SvParams::new(0.1)?;
    let mdl = sv_to_mdl(sv);
    println!(
        "SV bias {} gives the box [{:.4}, {:.4}]",
        sv.mu(),
        mdl.mu_min(),
        mdl.mu_max()
    );

    let streams = Streams::new(11);
    let kinds = [
        ("extremal (1,0)", SourceKind::Extremal { favored: (1, 0) }),
        ("history toggle", SourceKind::HistoryToggle),
    ];
    for (name, kind) in kinds {
        let model = SourceModel::new(kind, mdl)?;
        model.audit(6)?;
        let mut rng = streams.at(Domain::Source, 0);
        let mut history = Vec::new();
        let mut counts: HashMap<(u8, u8), u32> = HashMap::new();
        for _ in 0..100_000 {
            let pair = sample_pair(&model, &history, &mut rng);
            *counts.entry(pair).or_default() += 1;
            history.push(pair);
        }
        let mut freq: Vec<_> = counts.into_iter().collect();
        freq.sort();
        let shown: Vec<String> = freq
            .iter()
            .map(|(k, v)| format!("{k:?}: {:.4}", *v as f64 / 1e5))
            .collect();
        println!("{name:<15} {}", shown.join("  "));
    }

    let seed_model = SourceModel::iid_uniform(mdl);
    let seed = draw_seed(&seed_model, 64, &mut streams.at(Domain::Seed, 0))?;
    println!(
        "64-bit seed: {} ones, min-entropy at least {:.2} bits",
        seed.count_ones(),
        seed_min_entropy(64, &mdl)
    );
    Ok(())
}
