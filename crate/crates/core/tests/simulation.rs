use vfeel_core::learning::LearningCurve;
use vfeel_core::lyapunov::queue_update;
use vfeel_core::simulator::aggregate;
use vfeel_core::{run_experiment, run_server, EdgeServer, SchemeKind, SimConfig, SlotMetrics};

fn cfg_with(pairs: &[(&str, &str)]) -> SimConfig {
    SimConfig::parse("", pairs.iter().copied()).unwrap()
}

/// Replays the queue recursion over a trace.
fn assert_queue_recursion(rows: &[SlotMetrics]) {
    let mut prev = 0.0;
    for r in rows {
        assert_eq!(
            r.queue_backlog_mb,
            queue_update(prev, r.arrivals_mb, r.departures_mb),
            "slot {}",
            r.slot
        );
        prev = r.queue_backlog_mb;
    }
}

#[test]
fn empty_fleet_is_quiet() {
    let cfg = cfg_with(&[("n_vehicles", "0"), ("max_slots", "20")]);
    let rows = run_server(&cfg, 0).unwrap();
    assert!(!rows.is_empty());
    for r in &rows {
        assert_eq!(r.n_star, 0);
        assert_eq!(r.queue_backlog_mb, 0.0);
        assert_eq!(r.accuracy, 0.0);
        assert_eq!(r.active_vehicles, 0);
    }
}

#[test]
fn proposed_never_overflows() {
    let rows = run_server(&SimConfig::default(), 3).unwrap();
    assert!(rows.iter().all(|r| r.queue_backlog_mb <= 2000.0));
    assert_queue_recursion(&rows);
}

#[test]
fn maximum_overflows_early() {
    let cfg = SimConfig::default().with_scheme(SchemeKind::Maximum);
    let rows = run_server(&cfg, 0).unwrap();
    let first = rows
        .iter()
        .position(|r| r.queue_backlog_mb > 2000.0)
        .unwrap();
    assert!(first < 10, "{first}");
    assert_eq!(rows[0].n_selected, rows[0].active_vehicles);
}

#[test]
fn queue_aware_schemes_respect_headroom() {
    for scheme in [SchemeKind::Proposed, SchemeKind::Random] {
        let cfg = SimConfig::default().with_scheme(scheme);
        let rows = run_server(&cfg, 1).unwrap();
        let mut prev = 0.0;
        for r in &rows {
            if prev + 10.0 > 2000.0 {
                assert_eq!(r.n_star, 0);
            }
            assert!(prev + r.arrivals_mb <= 2000.0);
            assert!(r.n_selected <= r.n_star);
            prev = r.queue_backlog_mb;
        }
    }
}

#[test]
fn slot_sequencing_is_pinned() {
    // arrivals enter the queue and the training set in the same slot
    let cfg = cfg_with(&[("max_slots", "300")]);
    let curve = LearningCurve::new(1.0, -0.3);
    let rows = run_server(&cfg, 0).unwrap();
    let mut trained = 0.0;
    let mut selected = 0;
    for r in &rows {
        trained += r.arrivals_mb;
        selected += r.n_selected as u64;
        assert_eq!(r.cumulative_trained_mb, trained);
        assert_eq!(r.cumulative_selected, selected);
        assert_eq!(r.arrivals_mb, 10.0 * r.n_selected as f64);
        assert_eq!(r.accuracy, curve.expected_accuracy(trained));
        assert_eq!(r.loss, 1.0 - r.accuracy);
    }
    // slot 0 starts from an empty queue, so the whole eligible fleet fits
    assert_eq!(rows[0].n_star, rows[0].active_vehicles);
    assert_queue_recursion(&rows);
}

#[test]
fn per_vehicle_data_is_conserved() {
    for scheme in SchemeKind::ALL {
        let cfg = SimConfig::default().with_scheme(scheme);
        let mut server = EdgeServer::new(&cfg, 2).unwrap();
        let mut rows = Vec::new();
        while server.slot() < 1500 && !server.is_finished() {
            rows.push(server.step());
        }
        let total: u64 = server.uploads().iter().sum();
        assert_eq!(total, rows.last().unwrap().cumulative_selected);
        for (i, v) in server.vehicles().iter().enumerate() {
            assert_eq!(
                server.initial_data()[i],
                v.remaining_data + 10 * server.uploads()[i]
            );
        }
        let arrivals: f64 = rows.iter().map(|r| r.arrivals_mb).sum();
        let departures: f64 = rows.iter().map(|r| r.departures_mb).sum();
        assert_eq!(arrivals - departures, rows.last().unwrap().queue_backlog_mb);
        assert_eq!(
            server.queue().backlog_mb(),
            server.queue().batches().map(|b| b.size_mb).sum::<f64>()
        );
    }
}

#[test]
fn energy_trajectories_never_increase() {
    let cfg = cfg_with(&[("energy_scale", "1e13"), ("max_slots", "400")]);
    let mut server = EdgeServer::new(&cfg, 0).unwrap();
    let mut prev: Vec<f64> = server
        .vehicles()
        .iter()
        .map(|v| v.remaining_energy)
        .collect();
    let mut drained = 0;
    for _ in 0..400 {
        server.step();
        for (p, v) in prev.iter_mut().zip(server.vehicles()) {
            assert!(v.remaining_energy <= *p);
            *p = v.remaining_energy;
        }
        drained = server
            .vehicles()
            .iter()
            .filter(|v| v.remaining_energy == 0.0 && !v.active)
            .count();
    }
    assert!(drained > 0, "scaled energy should exhaust some vehicles");
}

#[test]
fn same_seed_same_trace() {
    let cfg = cfg_with(&[("max_slots", "400"), ("scheme", "random")]);
    assert_eq!(run_server(&cfg, 4).unwrap(), run_server(&cfg, 4).unwrap());
    assert_ne!(run_server(&cfg, 4).unwrap(), run_server(&cfg, 5).unwrap());
}

#[test]
fn schemes_share_fleet_under_one_seed() {
    let base = cfg_with(&[("max_slots", "50")]);
    let a = EdgeServer::new(&base.with_scheme(SchemeKind::Proposed), 0).unwrap();
    let b = EdgeServer::new(&base.with_scheme(SchemeKind::Random), 0).unwrap();
    assert_eq!(a.vehicles(), b.vehicles());
    let ra = run_server(&base.with_scheme(SchemeKind::Proposed), 0).unwrap();
    let rb = run_server(&base.with_scheme(SchemeKind::Maximum), 0).unwrap();
    let active = |rows: &[SlotMetrics]| rows.iter().map(|r| r.active_vehicles).collect::<Vec<_>>();
    assert_eq!(active(&ra), active(&rb));
}

#[test]
fn single_server_aggregate_equals_trace() {
    let cfg = cfg_with(&[("n_servers", "1"), ("max_slots", "200")]);
    let e = run_experiment(&cfg).unwrap();
    assert_eq!(e.aggregate.len(), 200);
    for (a, r) in e.aggregate.iter().zip(&e.traces[0]) {
        assert_eq!(a.queue_backlog_mb, r.queue_backlog_mb);
        assert_eq!(a.n_star, r.n_star as f64);
        assert_eq!(a.cumulative_selected, r.cumulative_selected as f64);
        assert_eq!(a.accuracy, r.accuracy);
    }
}

#[test]
fn early_finishers_pad_with_final_stock() {
    let quick = cfg_with(&[("n_vehicles", "2"), ("max_slots", "1500")]);
    let short = run_server(&quick, 0).unwrap();
    let long = run_server(&SimConfig::default(), 0).unwrap();
    assert!(short.len() < long.len());
    let agg = aggregate(&[short.clone(), long.clone()]);
    assert_eq!(agg.len(), long.len());
    let last = short.last().unwrap();
    let t = short.len() + 5;
    assert_eq!(
        agg[t].cumulative_selected,
        (last.cumulative_selected + long[t].cumulative_selected) as f64 / 2.0
    );
    assert_eq!(agg[t].arrivals_mb, long[t].arrivals_mb / 2.0);
}

#[test]
fn respawn_keeps_fleet_populated() {
    let cfg = cfg_with(&[
        ("respawn", "true"),
        ("max_slots", "1500"),
        ("scheme", "random"),
    ]);
    let mut server = EdgeServer::new(&cfg, 0).unwrap();
    let mut rows = Vec::new();
    while server.slot() < 1500 && !server.is_finished() {
        rows.push(server.step());
    }
    assert_eq!(rows.len(), 1500);
    assert!(server.vehicles().len() > 100);
    assert!(rows.last().unwrap().active_vehicles > 50);
    for (i, v) in server.vehicles().iter().enumerate() {
        assert_eq!(v.id, i);
        assert_eq!(
            server.initial_data()[i],
            v.remaining_data + 10 * server.uploads()[i]
        );
    }
}

#[test]
fn alternate_modes_run_clean() {
    for pairs in [
        vec![("comm_quality_mode", "literal")],
        vec![("departure_model", "channel_gated")],
        vec![("utility_basis", "cumulative")],
        vec![("service_window", "none")],
    ] {
        let mut pairs = pairs;
        pairs.push(("max_slots", "600"));
        let cfg = cfg_with(&pairs);
        let rows = run_server(&cfg, 0).unwrap();
        assert_queue_recursion(&rows);
        assert!(
            rows.iter().all(|r| r.queue_backlog_mb <= 2000.0),
            "{pairs:?}"
        );
    }
}

#[test]
fn invalid_config_rejected_before_slot_zero() {
    let mut cfg = SimConfig {
        n_servers: 0,
        ..SimConfig::default()
    };
    assert!(run_experiment(&cfg).is_err());
    cfg.n_servers = 1;
    cfg.q_max_mb = -1.0;
    assert!(EdgeServer::new(&cfg, 0).is_err());
}
