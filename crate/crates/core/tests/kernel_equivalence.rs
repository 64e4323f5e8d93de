//! Every kernelizer against the exhaustive oracle on small random graphs.

use crownkernel::graph::{generate_instance, InstanceKind, WeightedGraph};
use crownkernel::kernels::{
    kernelize_coc2, kernelize_coc_fpt, kernelize_vi, kernelize_wcoc, kernelize_wvi, replay, Coc2Mode, Instance,
    KernelOptions, KernelOutcome,
};
use crownkernel::oracle::{check_equivalence, DEFAULT_CAP};

fn audit() -> KernelOptions {
    KernelOptions { audit: true, ..Default::default() }
}

fn gnp(n: u32, p: f64, max_weight: u64, seed: u64) -> WeightedGraph {
    generate_instance(&InstanceKind::RandomGnp { n, p, max_weight }, seed).unwrap()
}

fn check(inst: &Instance, out: &KernelOutcome, label: &str) {
    assert!(out.violations.is_empty(), "{label}: {:?}", out.violations);
    assert_eq!(replay(inst, &out.certificate).unwrap(), out.instance, "{label}: replay differs");
    let eq = check_equivalence(inst, out, DEFAULT_CAP).unwrap();
    assert!(eq.holds(), "{label}: oracle {} but kernel {} ({:?})", eq.original, eq.kernel, out.verdict);
}

#[test]
fn coc_fpt_matches_oracle() {
    let mut seed = 0;
    for n in [6, 8, 10, 12] {
        for p in [0.2, 0.4, 0.6] {
            for w in 1..=3 {
                for k in 0..=4 {
                    seed += 1;
                    let inst = Instance::coc(gnp(n, p, 1, seed), k, w);
                    let out = kernelize_coc_fpt(&inst, &audit()).unwrap();
                    check(&inst, &out, &format!("coc-fpt n={n} p={p} W={w} k={k} seed={seed}"));
                }
            }
        }
    }
}

#[test]
fn coc2_matching_matches_oracle() {
    for seed in 0..300 {
        let n = 6 + (seed % 7) as u32;
        let p = [0.15, 0.3, 0.5][seed as usize % 3];
        let g = gnp(n, p, 1, 1000 + seed);
        for k in 0..=4 {
            let inst = Instance::coc(g.clone(), k, 1);
            let out = kernelize_coc2(&inst, Coc2Mode::MatchingSeeded, &audit()).unwrap();
            check(&inst, &out, &format!("coc2 n={n} k={k} seed={seed}"));
        }
    }
}

#[test]
fn coc2_clawfree_matches_oracle() {
    let mut done = 0;
    for seed in 0..400 {
        let g = generate_instance(&InstanceKind::ClawfreeLinegraph { base_n: 7, p: 0.35, max_weight: 1 }, seed).unwrap();
        if g.vertex_count() > 12 || g.is_empty() {
            continue;
        }
        done += 1;
        for w in 1..=3 {
            for k in 0..=3 {
                let inst = Instance::coc(g.clone(), k, w);
                let out = kernelize_coc2(&inst, Coc2Mode::Clawfree, &audit()).unwrap();
                check(&inst, &out, &format!("coc2-clawfree W={w} k={k} seed={seed}"));
            }
        }
    }
    assert!(done > 50);
}

#[test]
fn vi_matches_oracle() {
    for seed in 0..200 {
        let n = 6 + (seed % 7) as u32;
        let p = [0.15, 0.3, 0.5][seed as usize % 3];
        let g = gnp(n, p, 1, 2000 + seed);
        for budget in 1..=5 {
            let inst = Instance::vi(g.clone(), budget);
            let out = kernelize_vi(&inst, &audit()).unwrap();
            check(&inst, &out, &format!("vi n={n} p={budget} seed={seed}"));
        }
    }
}

#[test]
fn wvi_matches_oracle() {
    for seed in 0..200 {
        let n = 5 + (seed % 6) as u32;
        let p = [0.15, 0.3, 0.5][seed as usize % 3];
        let g = gnp(n, p, 3, 3000 + seed);
        for budget in 1..=6 {
            let inst = Instance::wvi(g.clone(), budget);
            let out = kernelize_wvi(&inst, &audit()).unwrap();
            check(&inst, &out, &format!("wvi n={n} p={budget} seed={seed}"));
        }
    }
}

#[test]
fn wcoc_matches_oracle() {
    for seed in 0..200 {
        let n = 6 + (seed % 7) as u32;
        let p = [0.15, 0.3, 0.5][seed as usize % 3];
        let g = gnp(n, p, 3, 4000 + seed);
        for w in 1..=3 {
            for k in 0..=4 {
                let inst = Instance::wcoc(g.clone(), k, w);
                let out = kernelize_wcoc(&inst, &audit()).unwrap();
                check(&inst, &out, &format!("wcoc n={n} W={w} k={k} seed={seed}"));
            }
        }
    }
}
