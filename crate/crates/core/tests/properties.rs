//! Randomized invariants, each checked against an independent recomputation.

use proptest::prelude::*;

use crownkernel::bcd::{compute_bcd, maximum_matching, packing_from_bcd, verify_bcd, verify_packing};
use crownkernel::dbe::{compute_fractional_dbe, round_fractional, verify_dbe, verify_fractional, A2Bound, Demands};
use crownkernel::graph::{
    components_of_subset, connected_components, drop_light_components, parse_graph, render_graph, SizeMeasure,
};
use crownkernel::kernels::{
    kernelize_coc2, kernelize_coc_fpt, kernelize_vi, kernelize_wcoc, kernelize_wvi, replay, unique_w_separator,
    Coc2Mode, Instance, KernelOptions, Verdict,
};
use crownkernel::maxflow::{brute_min_cut, FlowNetwork};
use crownkernel::oracle::{brute_coc, brute_max_packing};
use crownkernel::{VertexSet, WeightedGraph};

/// Graph on `1..=n` from an edge bitmap and a weight list.
fn build(n: u32, bits: &[bool], weights: &[u64]) -> WeightedGraph {
    let mut g = WeightedGraph::new();
    for v in 1..=n {
        g.add_vertex(v, weights[(v - 1) as usize]).unwrap();
    }
    let mut i = 0;
    for u in 1..=n {
        for v in u + 1..=n {
            if bits[i] {
                g.add_edge(u, v).unwrap();
            }
            i += 1;
        }
    }
    g
}

fn graph(max_n: u32, max_weight: u64) -> impl Strategy<Value = WeightedGraph> {
    (1..=max_n).prop_flat_map(move |n| {
        let m = (n * (n - 1) / 2) as usize;
        (Just(n), proptest::collection::vec(prop::bool::weighted(0.3), m), proptest::collection::vec(1..=max_weight, n as usize))
            .prop_map(|(n, bits, w)| build(n, &bits, &w))
    })
}

fn audit() -> KernelOptions {
    KernelOptions { audit: true, ..Default::default() }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 128, ..ProptestConfig::default() })]

    #[test]
    fn render_then_parse_is_identity(g in graph(12, 4)) {
        prop_assert_eq!(parse_graph(&render_graph(&g)).unwrap(), g);
    }

    #[test]
    fn components_partition_the_vertices(g in graph(14, 1)) {
        let comps = connected_components(&g);
        let mut seen = VertexSet::new();
        for c in &comps {
            prop_assert!(g.is_connected_set(c));
            prop_assert!(g.neighborhood(c).is_empty());
            for &v in c {
                prop_assert!(seen.insert(v));
            }
        }
        prop_assert_eq!(seen, g.vertex_set());
    }

    #[test]
    fn bcd_is_valid_and_its_packing_is_feasible(g in graph(14, 3), lambda in 1u64..=4) {
        let g = drop_light_components(&g, lambda, SizeMeasure::Weight);
        let b = compute_bcd(&g, lambda).unwrap();
        prop_assert!(verify_bcd(&g, &b).is_ok(), "{:?}", verify_bcd(&g, &b));
        prop_assert_eq!(b.covered(), g.vertex_set());
        let p = packing_from_bcd(&b);
        prop_assert!(verify_packing(&g, &p).is_ok());
    }

    #[test]
    fn bcd_packing_never_beats_the_optimum(g in graph(10, 1), lambda in 1u64..=3) {
        let g = drop_light_components(&g, lambda, SizeMeasure::Weight);
        let b = compute_bcd(&g, lambda).unwrap();
        let best = brute_max_packing(&g, lambda + 1, 10).unwrap();
        prop_assert!(b.packing_size() <= best.parts.len());
    }

    #[test]
    fn matching_is_a_maximum_edge_packing(g in graph(10, 1)) {
        let m = maximum_matching(&g);
        prop_assert!(verify_packing(&g, &m).is_ok());
        prop_assert_eq!(m.parts.len(), brute_max_packing(&g, 2, 10).unwrap().parts.len());
    }

    #[test]
    fn dinic_matches_the_minimum_cut(
        nodes in 2usize..=6,
        arcs in proptest::collection::vec((0usize..6, 0usize..6, 0u64..5), 0..14),
    ) {
        let mut net = FlowNetwork::new(nodes, 0, nodes - 1);
        for (u, v, c) in arcs {
            if u < nodes && v < nodes && u != v {
                net.add_arc(u, v, c);
            }
        }
        let cut = brute_min_cut(&net);
        prop_assert_eq!(net.max_flow(), cut);
        prop_assert!(net.is_feasible_flow());
    }

    #[test]
    fn expansions_are_valid_and_round_within_y(
        g in graph(11, 3),
        split in 1usize..=4,
        extra in proptest::collection::vec(0u64..=5, 11),
    ) {
        let ids: Vec<u32> = g.vertices().collect();
        let a: VertexSet = ids.iter().copied().take(split.min(ids.len())).collect();
        let b_all: VertexSet = g.vertex_set().difference(&a).copied().collect();
        // Keep only the components that see the head side.
        let b: VertexSet = components_of_subset(&g, &b_all)
            .into_iter()
            .filter(|q| !g.neighborhood(q).is_disjoint(&a))
            .flatten()
            .collect();
        let g = g.induced(&a.union(&b).copied().collect());
        let y = components_of_subset(&g, &b).iter().map(|q| g.weight_of(q)).max().unwrap_or(1).max(1);
        let demands: Demands = a.iter().enumerate().map(|(i, &v)| (v, g.weight(v) + extra[i])).collect();
        let fr = compute_fractional_dbe(&g, &a, &b, &demands, y).unwrap();
        prop_assert!(verify_fractional(&g, &fr).is_ok(), "{:?}", verify_fractional(&g, &fr));
        let dbe = round_fractional(&g, &fr);
        prop_assert!(verify_dbe(&g, &a, &b, &dbe, A2Bound::Guaranteed).is_ok());
        prop_assert_eq!(&dbe.a1, &fr.a1);
        for &h in &a {
            let fractional: u64 = fr.mass.iter().map(|m| m.get(&h).copied().unwrap_or(0)).sum();
            let integral = dbe.assigned_weight(&g, h);
            // Components left without flow can only border A1 heads (an A2
            // neighbour would give an augmenting path), and they are handed
            // to one of them. So A1 heads may gain arbitrarily, never lose y.
            if dbe.a1.contains(&h) {
                prop_assert!(integral + y > fractional, "head {h}: {integral} vs {fractional}");
            } else {
                prop_assert!(integral.abs_diff(fractional) < y, "head {h}: {integral} vs {fractional}");
            }
        }
    }

    #[test]
    fn separator_is_the_only_one(g in graph(10, 1), w in 1u64..=3) {
        for r in connected_components(&g) {
            let gr = g.induced(&r);
            let all: Vec<u32> = r
                .iter()
                .copied()
                .filter(|&v| {
                    let rest: VertexSet = r.iter().copied().filter(|&u| u != v).collect();
                    components_of_subset(&gr, &rest).iter().all(|c| c.len() as u64 <= w)
                })
                .collect();
            let expected = if r.len() as u64 > 2 * w { all.first().copied() } else { None };
            prop_assert_eq!(unique_w_separator(&gr, w), expected);
            if r.len() as u64 > 2 * w {
                prop_assert!(all.len() <= 1);
            }
        }
    }

    #[test]
    fn every_kernelizer_replays_and_audits_clean(g in graph(11, 1), k in 0u64..=4, w in 1u64..=3, p in 1u64..=5) {
        let runs = [
            (Instance::coc(g.clone(), k, w), kernelize_coc_fpt(&Instance::coc(g.clone(), k, w), &audit())),
            (Instance::coc(g.clone(), k, 1), kernelize_coc2(&Instance::coc(g.clone(), k, 1), Coc2Mode::MatchingSeeded, &audit())),
            (Instance::vi(g.clone(), p), kernelize_vi(&Instance::vi(g.clone(), p), &audit())),
        ];
        for (inst, out) in runs {
            let out = out.unwrap();
            prop_assert!(out.violations.is_empty(), "{:?}", out.violations);
            prop_assert_eq!(&replay(&inst, &out.certificate).unwrap(), &out.instance);
            prop_assert!(out.instance.budget <= inst.budget);
        }
    }

    #[test]
    fn weighted_kernelizers_replay_and_audit_clean(g in graph(11, 3), k in 0u64..=5, w in 1u64..=3, p in 1u64..=6) {
        let wc = Instance::wcoc(g.clone(), k, w);
        let wv = Instance::wvi(g.clone(), p);
        for (inst, out) in [(wc.clone(), kernelize_wcoc(&wc, &audit())), (wv.clone(), kernelize_wvi(&wv, &audit()))] {
            let out = out.unwrap();
            prop_assert!(out.violations.is_empty(), "{:?}", out.violations);
            prop_assert_eq!(&replay(&inst, &out.certificate).unwrap(), &out.instance);
        }
    }

    #[test]
    fn vertex_cover_kernel_has_at_most_2k_vertices(g in graph(12, 1)) {
        let k = brute_coc(&g, 0, 1, 12).unwrap().optimum.unwrap();
        let out = kernelize_coc2(&Instance::coc(g, k, 1), Coc2Mode::MatchingSeeded, &audit()).unwrap();
        prop_assert_ne!(out.verdict, Verdict::DecidedNo);
        if matches!(out.verdict, Verdict::Reduced | Verdict::AlreadySmall) {
            prop_assert!(out.instance.graph.vertex_count() as u64 <= 2 * k);
        }
    }

    #[test]
    fn kernelizing_twice_is_deterministic(g in graph(12, 1), k in 0u64..=4) {
        let inst = Instance::coc(g, k, 2);
        let a = kernelize_coc_fpt(&inst, &KernelOptions::default()).unwrap();
        let b = kernelize_coc_fpt(&inst, &KernelOptions::default()).unwrap();
        prop_assert_eq!(a, b);
    }
}
