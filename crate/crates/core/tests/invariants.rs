use proptest::prelude::*;
use slicesim::memory::HierarchyConfig;
use slicesim::pipeline::{simulate, simulate_detailed, CoreConfig, QueueTag, Variant};
use slicesim::slicer::{oracle_slice_graph, Ist, Slicer};
use slicesim::trace::{format_trace, generate, parse_trace_with_meta, OpKind, Pattern, Trace, WorkloadSpec};

fn pattern() -> impl Strategy<Value = Pattern> {
    prop_oneof![
        Just(Pattern::IndepLoads),
        (0u32..4).prop_map(|depth| Pattern::DepChain { depth }),
        (0.0f64..=1.0).prop_map(|dependent_fraction| Pattern::MixedSlices { dependent_fraction }),
        (0.0f64..=1.0).prop_map(|alias_probability| Pattern::AliasMix { alias_probability }),
        prop_oneof![Just(8u64), Just(64), Just(128), Just(200)].prop_map(|stride| Pattern::Stream { stride }),
    ]
}

fn spec() -> impl Strategy<Value = WorkloadSpec> {
    (
        pattern(),
        prop_oneof![Just(1024u64), Just(8 * 1024), Just(64 * 1024), Just(2 << 20)],
        1u32..16,
        any::<u64>(),
        prop_oneof![Just(0.0), 0.0f64..0.3],
    )
        .prop_map(|(p, fp, n, seed, bp)| WorkloadSpec::new(p, fp, n, seed).with_mispredict_rate(bp))
}

fn trace() -> impl Strategy<Value = Trace> {
    spec().prop_map(|s| generate(&s).unwrap())
}

fn core() -> impl Strategy<Value = CoreConfig> {
    (
        prop::sample::select(Variant::ALL.to_vec()),
        1u32..5,
        4u32..96,
        2u32..40,
        any::<[bool; 5]>(),
    )
        .prop_map(|(v, width, window, q, flags)| {
            let mut c = CoreConfig::new(v);
            c.issue_width = width;
            c.window = window;
            c.set_total_queue_entries(q * 2);
            c.options.skip_aliased_loads = flags[0];
            c.options.second_yiq = flags[1] && v == Variant::Freeway;
            c.options.oracle_load_spec = flags[2];
            c.options.warm_ist = flags[3];
            c.options.warm_caches = flags[4];
            c
        })
}

fn mem() -> impl Strategy<Value = HierarchyConfig> {
    (1u32..9, any::<bool>(), prop::option::of(1.0f64..64.0)).prop_map(|(lat, pf, bw)| {
        let mut m = HierarchyConfig::default();
        m.l1.hit_latency = lat;
        m.prefetcher_enabled = pf;
        m.dram_bandwidth = bw;
        m
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn trace_text_round_trips(t in trace()) {
        let back = parse_trace_with_meta(&format_trace(&t)).unwrap();
        prop_assert_eq!(back, t);
    }

    #[test]
    fn generation_is_deterministic(s in spec()) {
        prop_assert_eq!(generate(&s).unwrap(), generate(&s).unwrap());
    }

    #[test]
    fn slice_graph_depths_are_consistent(t in trace()) {
        let g = oracle_slice_graph(&t.ops);
        for s in &g.slices {
            prop_assert!(s.producers.iter().all(|&p| p < s.id), "edges point backwards in time");
            let expect = s.producers.iter().map(|&p| g.slices[p].depth + 1).max().unwrap_or(0);
            prop_assert_eq!(s.depth, expect);
        }
    }

    #[test]
    fn dependence_bit_is_sound_at_steady_state(t in trace()) {
        prop_assume!(t.meta.iterations >= 2);
        let g = oracle_slice_graph(&t.ops);
        let final_start = (t.len() - t.final_iteration().len()) as u64;
        let mut slicer = Slicer::new(Ist::unbounded());
        for op in &t.ops {
            let info = slicer.process(op);
            if op.seq >= final_start && op.kind.is_mem() {
                let slice = g.slice_of(op.seq).unwrap();
                prop_assert_eq!(info.is_dependent, slice.depth >= 1, "seq {}", op.seq);
            }
        }
    }

    #[test]
    fn timing_invariants(t in trace(), c in core(), m in mem()) {
        let (s, d) = simulate_detailed(&t, &c, &m).unwrap();
        let stores = t.ops.iter().filter(|o| o.kind == OpKind::Store).count() as u64;
        prop_assert_eq!(s.retired_instrs, t.len() as u64);
        prop_assert_eq!(s.retired_uops, t.len() as u64 + stores);
        prop_assert_eq!(s.issue_stall.total(), s.zero_issue_cycles);
        prop_assert!(s.audit.is_clean(), "{:?}", s.audit);

        // Retirement in program order.
        let retire: Vec<u64> = d.uops.iter().map(|u| u.retire.unwrap()).collect();
        prop_assert!(retire.windows(2).all(|w| w[0] <= w[1]));
        prop_assert!(d.uops.windows(2).all(|w| (w[0].seq, w[0].part) <= (w[1].seq, w[1].part)));
        for u in &d.uops {
            let (i, done, r) = (u.issue.unwrap(), u.complete.unwrap(), u.retire.unwrap());
            prop_assert!(u.dispatch < i && i < done && done <= r && r < s.cycles);
        }

        // Window and queue occupancy.
        let cap = |q: QueueTag| match q {
            QueueTag::A => c.q_a,
            QueueTag::B => c.q_b,
            QueueTag::Y => c.q_y,
            QueueTag::Y2 => c.q_y2,
            QueueTag::Window => c.window,
        } as usize;
        let mut events: Vec<u64> = d.uops.iter().map(|u| u.dispatch).collect();
        events.sort_unstable();
        events.dedup();
        for cyc in events {
            let live = d.uops.iter().filter(|u| u.dispatch <= cyc && u.retire.unwrap() > cyc).count();
            prop_assert!(live <= c.window as usize, "window {} at {}", live, cyc);
            for q in [QueueTag::A, QueueTag::B, QueueTag::Y, QueueTag::Y2, QueueTag::Window] {
                let n = d.uops.iter().filter(|u| u.queue == q && u.dispatch <= cyc && u.issue.unwrap() > cyc).count();
                prop_assert!(n <= cap(q), "{:?} holds {} at {}", q, n, cyc);
            }
        }
    }

    #[test]
    fn simulation_is_deterministic(t in trace(), c in core(), m in mem()) {
        prop_assert_eq!(simulate(&t, &c, &m).unwrap(), simulate(&t, &c, &m).unwrap());
    }
}
