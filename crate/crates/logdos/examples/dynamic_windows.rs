//! Walks the dynamic-logging window state machine: extension under
//! attack, silence without one, and the collateral loss of a legitimate
//! round trip that straddles a silent period.
//!
//! Run with: cargo run --example dynamic_windows

use std::collections::HashMap;

use logdos::bloom::RotatingFilterPair;
use logdos::engine::simulate_round_trip;
use logdos::messages::ServiceId;
use logdos::strategies::{DataContext, DynamicParams, DynamicState, RouterState, StrategyKind};
use logdos::topology::{AsId, PathId};

fn dynamic_router(params: DynamicParams, phase: u64, seed: u64) -> RouterState {
    RouterState::new(
        StrategyKind::Dynamic,
        RotatingFilterPair::new(1 << 12, 3, 1 << 20, seed).unwrap(),
        Some(DynamicState::new(params, phase)),
        42,
    )
}

fn show(router: &RouterState, label: &str) {
    let dy = router.dynamic().unwrap();
    println!(
        "  {label}: logging [{}, {}), validating [{}, {}), invalid_count {}",
        dy.window_start,
        dy.window_start + dy.duration,
        dy.window_start + dy.params.validation_shift,
        dy.window_start + dy.duration + dy.params.validation_shift,
        dy.invalid_count
    );
}

fn main() {
    let params = DynamicParams {
        initial_duration: 100,
        silent_period: 100,
        validation_shift: 10,
        invalid_threshold: 3,
    };

    println!(
        "window extension under attack (threshold {}):",
        params.invalid_threshold
    );
    let mut router = dynamic_router(params, 0, 1);
    show(&router, "initial");
    for _ in 0..5 {
        router.on_data(ServiceId(9), &[PathId(1)], &DataContext::at(50));
    }
    show(&router, "after 5 invalid DATA");
    router.advance(110);
    show(&router, "decision at t=110   ");

    println!("\nrollover into silence without an attack:");
    let mut router = dynamic_router(params, 0, 2);
    show(&router, "initial");
    router.advance(110);
    show(&router, "decision at t=110   ");

    // a GET issued while the router is silent is never logged; if its DATA
    // comes back inside the next validation window it is rejected
    println!("\ncollateral round trip across a silent period:");
    let mut routers = HashMap::new();
    routers.insert(AsId(1), dynamic_router(params, 0, 3));
    routers.insert(AsId(2), dynamic_router(params, 0, 4));
    let outcome = simulate_round_trip(
        &mut routers,
        &[AsId(1), AsId(2)],
        &[PathId(0xAB)],
        ServiceId(5),
        150, // inside the silent span [100, 200)
        30,  // DATA returns at 210, inside the next validation window
    );
    println!(
        "  GET at tick 150, DATA back at tick 210: delivered={}, rejected_at={:?}",
        outcome.delivered, outcome.rejected_at
    );

    // the same trip issued inside a logging window survives
    let mut routers = HashMap::new();
    routers.insert(AsId(1), dynamic_router(params, 0, 3));
    routers.insert(AsId(2), dynamic_router(params, 0, 4));
    let outcome = simulate_round_trip(
        &mut routers,
        &[AsId(1), AsId(2)],
        &[PathId(0xAB)],
        ServiceId(5),
        20,
        30,
    );
    println!(
        "  GET at tick 20, DATA back at tick 80: delivered={}, rejected_at={:?}",
        outcome.delivered, outcome.rejected_at
    );
}
