// SPDX-License-Identifier: Apache-2.0

//! Exit criteria. Runs without the libtest harness so every criterion prints
//! exactly one PASS/FAIL line; the process fails if any criterion fails.

mod common;

use std::collections::HashMap;
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use snn_core::engine::{Engine, Phase, ReferenceEngine};
use snn_core::goldens::{builtin_cases, run_golden, search_reconstruction, Simulator};
use snn_core::ioformats::{format_trace, TraceFormat};
use snn_core::min_accumulator_width;
use snn_core::netmodel::signed_range;
use snn_core::plasticity::potentiation_index;

const SEED: u64 = 0x5eed_2024;
const DIFFERENTIAL_NETWORKS: usize = 1000;
const PROPERTY_NETWORKS: usize = 500;
const CYCLES: u64 = 64;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 6] = [
        ("golden-trace reproduction", golden_traces),
        ("stdp index arithmetic", stdp_indices),
        ("minimum accumulator width", accumulator_width),
        ("differential oracle", differential),
        ("property suite", properties),
        ("fixture reconstruction uniqueness", reconstruction),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let elapsed = start.elapsed();
        match outcome {
            Ok(detail) => println!(
                "PASS criterion {}: {name}: {detail} [{:.2?}]",
                i + 1,
                elapsed
            ),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {}: {name}: {why} [{:.2?}]", i + 1, elapsed);
            }
        }
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}

fn golden_traces() -> Outcome {
    let start = Instant::now();
    let cases = builtin_cases();
    let expected_lengths = [15, 16, 11, 8, 3, 10, 12, 8, 5, 5, 11, 10];
    let lengths: Vec<u64> = cases.iter().map(|c| c.cycles).collect();
    if lengths != expected_lengths {
        return Err(format!("case lengths {lengths:?}, want {expected_lengths:?}"));
    }
    let mut cells = 0;
    for case in &cases {
        for sim in [Simulator::Engine, Simulator::Reference] {
            let report = run_golden(case, sim).map_err(|e| e.to_string())?;
            if !report.passed() {
                return Err(format!("{sim:?}: {report}"));
            }
        }
        cells += case.expected.len() * case.network.neurons.len() * 2;
    }
    let elapsed = start.elapsed();
    if elapsed > Duration::from_secs(1) {
        return Err(format!("took {elapsed:.2?}, budget 1s"));
    }
    Ok(format!(
        "{}/{} cases, {cells} fire+charge cells exact on both simulators",
        cases.len(),
        cases.len()
    ))
}

fn stdp_indices() -> Outcome {
    let got: Vec<i64> = [7, 10, 12]
        .iter()
        .map(|&x| potentiation_index(8, 12, x))
        .collect();
    if got == [-1, 2, 4] {
        Ok("T=8, y=12, x={7,10,12} -> {-1,2,4}".into())
    } else {
        Err(format!("got {got:?}"))
    }
}

/// Largest charge one cycle can bring in, by summing port contributions
/// one at a time in arbitrary precision, over both injection settings.
fn worst_case_accumulation(weight_bits: u32, ports: u32, injection_ports: u32) -> BigUint {
    let one = BigUint::from(1u32);
    let synapse_max = (&one << weight_bits) - &one;
    let injection_max = (&one << injection_ports) - &one;
    let mut worst = BigUint::from(0u32);
    for injection_enabled in [false, true] {
        let synapse_ports = if injection_enabled {
            ports - injection_ports
        } else {
            ports
        };
        for active in 0..=synapse_ports {
            let mut total = BigUint::from(0u32);
            for _ in 0..active {
                total += &synapse_max;
            }
            if injection_enabled {
                total += &injection_max;
            }
            if total > worst {
                worst = total;
            }
        }
    }
    worst
}

/// Exhaustive over every per-port magnitude; only feasible for tiny sizes.
fn worst_case_exhaustive(weight_bits: u32, ports: u32, injection_ports: u32) -> u64 {
    let synapse_max = (1u64 << weight_bits) - 1;
    let injection_max = (1u64 << injection_ports) - 1;
    let mut worst = 0;
    for injection_enabled in [false, true] {
        let k = if injection_enabled {
            ports - injection_ports
        } else {
            ports
        };
        let combos = (synapse_max + 1).pow(k);
        for code in 0..combos {
            let mut c = code;
            let mut total = 0;
            for _ in 0..k {
                total += c % (synapse_max + 1);
                c /= synapse_max + 1;
            }
            if injection_enabled {
                for m in 0..=injection_max {
                    worst = worst.max(total + m);
                }
            } else {
                worst = worst.max(total);
            }
        }
    }
    worst
}

fn bits_to_hold(x: &BigUint) -> u32 {
    let mut width = 0;
    let mut capacity = BigUint::from(1u32);
    while &capacity < x {
        capacity <<= 1;
        width += 1;
    }
    width
}

fn accumulator_width() -> Outcome {
    let mut checked = 0;
    for w in 1..=8 {
        for s in 1..=16 {
            for c in 0..=s {
                let want = bits_to_hold(&worst_case_accumulation(w, s, c));
                let got = min_accumulator_width(w, s, c).map_err(|e| e.to_string())?;
                if got != want {
                    return Err(format!("W={w} S={s} C={c}: got {got}, oracle {want}"));
                }
                checked += 1;
            }
        }
    }
    for w in 1..=3 {
        for s in 1..=4 {
            for c in 0..=s {
                let brute = BigUint::from(worst_case_exhaustive(w, s, c));
                if brute != worst_case_accumulation(w, s, c) {
                    return Err(format!("oracles disagree at W={w} S={s} C={c}"));
                }
            }
        }
    }
    for (w, s, c, want) in [(4, 8, 4, 7), (1, 2, 0, 1), (8, 4, 2, 10)] {
        let got = min_accumulator_width(w, s, c).unwrap();
        if got != want {
            return Err(format!("W={w} S={s} C={c}: got {got}, want {want}"));
        }
    }
    Ok(format!("{checked} (W,S,C) triples agree with the arbitrary-precision oracle"))
}

fn differential() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut fires = 0usize;
    for i in 0..DIFFERENTIAL_NETWORKS {
        let s = common::random_sample(&mut rng, CYCLES);
        let mut fast = Engine::new(&s.net, &s.hw, &s.stim).map_err(|e| e.to_string())?;
        let mut slow = ReferenceEngine::new(&s.net, &s.hw, &s.stim).map_err(|e| e.to_string())?;
        for _ in 0..CYCLES {
            let a = fast.step();
            let b = slow.step();
            if a != b {
                return Err(format!("network {i}: {a:?} != {b:?}"));
            }
            if fast.weights() != slow.weights() {
                return Err(format!("network {i}: weights diverge at cycle {}", a.cycle));
            }
            fires += a.fired.len();
        }
    }
    Ok(format!(
        "{DIFFERENTIAL_NETWORKS} random networks x {CYCLES} cycles, 0 divergences ({fires} fires)"
    ))
}

fn properties() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 0xffff);
    let mut samples: Vec<common::Sample> = (0..PROPERTY_NETWORKS)
        .map(|_| common::random_sample(&mut rng, CYCLES))
        .collect();
    for case in builtin_cases() {
        samples.push(common::Sample {
            hw: case.hardware,
            net: case.network,
            stim: case.stimulus,
        });
    }

    let mut counts: HashMap<&str, usize> = HashMap::new();
    for (i, s) in samples.iter().enumerate() {
        let fail = |what: &str, detail: String| Err(format!("{what} (network {i}): {detail}"));
        let mut engine = Engine::new(&s.net, &s.hw, &s.stim).map_err(|e| e.to_string())?;
        let initial = engine.weights();
        let (w_lo, w_hi) = signed_range(s.hw.weight_width_bits);
        let mut prev_charges: Option<Vec<i64>> = None;
        let mut last_fire: Vec<Option<u64>> = vec![None; s.net.neurons.len()];
        let mut scheduled: HashMap<(usize, u64), u64> = HashMap::new();
        let mut out_synapses: Vec<Vec<usize>> = vec![Vec::new(); s.net.neurons.len()];
        for (k, syn) in s.net.synapses.iter().enumerate() {
            out_synapses[s.net.neuron_index(&syn.pre).unwrap()].push(k);
        }

        for _ in 0..CYCLES {
            let report = engine.step();
            let t = report.cycle;

            // strict threshold: fire at t iff the charge at the end of t-1 exceeded threshold
            for (n, settings) in s.net.neurons.iter().enumerate() {
                let fired = report.fired.contains(&n);
                let should = prev_charges
                    .as_ref()
                    .is_some_and(|c| c[n] > settings.threshold);
                if fired != should {
                    return fail("strict threshold", format!("neuron {n} cycle {t}"));
                }
                *counts.entry("threshold").or_default() += 1;
            }
            for &n in &report.fired {
                last_fire[n] = Some(t);
                for &k in &out_synapses[n] {
                    let due = t + s.net.synapses[k].delay as u64;
                    *scheduled.entry((k, due)).or_default() += 1;
                }
            }

            // absolute refractory: charge is pinned to the post-fire reset value
            for (n, settings) in s.net.neurons.iter().enumerate() {
                let Some(f) = last_fire[n] else { continue };
                if t >= f + settings.absolute_refractory as u64 {
                    continue;
                }
                let reset = if settings.relative_refractory > 0 {
                    settings.refractory_resting_potential
                } else {
                    settings.standard_resting_potential
                };
                if report.charges[n] != reset {
                    return fail(
                        "absolute refractory immunity",
                        format!("neuron {n} cycle {t}: {} != {reset}", report.charges[n]),
                    );
                }
                *counts.entry("absolute").or_default() += 1;
            }

            // delays are exact and every scheduled delivery is consumed once
            for d in engine.last_deliveries() {
                let delay = s.net.synapses[d.synapse].delay as u64;
                if d.delivery_cycle != t || d.delivery_cycle - d.fire_cycle != delay {
                    return fail("delay exactness", format!("{d:?}"));
                }
                match scheduled.get_mut(&(d.synapse, t)) {
                    Some(c) if *c > 0 => *c -= 1,
                    _ => return fail("delay exactness", format!("unscheduled {d:?}")),
                }
                *counts.entry("delivery").or_default() += 1;
            }
            if scheduled.iter().any(|(&(_, due), &c)| due <= t && c > 0) {
                return fail("delay exactness", format!("undelivered spike by cycle {t}"));
            }

            // floors hold on the settled state
            for (n, state) in engine.neuron_states().iter().enumerate() {
                let settings = &s.net.neurons[n];
                let floor = match state.phase {
                    Phase::Standard => Some(settings.standard_resting_potential),
                    Phase::RelativeRefractory { .. } => Some(settings.refractory_resting_potential),
                    Phase::AbsoluteRefractory { .. } => None,
                };
                if let Some(floor) = floor {
                    if state.accumulator < floor {
                        return fail("resting floors", format!("neuron {n} cycle {t}"));
                    }
                    *counts.entry("floor").or_default() += 1;
                }
            }

            for w in engine.weights() {
                if w < w_lo || w > w_hi {
                    return fail("weight clamping", format!("{w} outside [{w_lo}, {w_hi}]"));
                }
            }
            prev_charges = Some(report.charges);
        }

        if !s.net.stdp_enabled {
            if engine.weights() != initial {
                return fail("frozen weights", "stdp disabled but weights moved".into());
            }
            *counts.entry("frozen").or_default() += 1;
        }

        let run = || {
            let mut e = Engine::new(&s.net, &s.hw, &s.stim).unwrap();
            format_trace(&e.run(CYCLES), TraceFormat::Jsonl)
        };
        if run() != run() {
            return fail("determinism", "two runs differ".into());
        }
    }
    Ok(format!(
        "{} networks x {CYCLES} cycles; checks: threshold {}, absolute {}, delivery {}, floor {}, frozen-weight nets {}",
        samples.len(),
        counts["threshold"],
        counts["absolute"],
        counts["delivery"],
        counts["floor"],
        counts["frozen"],
    ))
}

fn reconstruction() -> Outcome {
    let mut total = 0;
    let mut summary = Vec::new();
    for case in builtin_cases() {
        let outcome = search_reconstruction(&case).map_err(|e| e.to_string())?;
        if !outcome.unique() {
            return Err(format!(
                "{}: {} solutions, fixture {:?}, first {:?}",
                case.name,
                outcome.solutions.len(),
                outcome.fixture,
                outcome.solutions.first()
            ));
        }
        total += outcome.candidates;
        summary.push(format!("{}:{}", case.name, outcome.searched.len()));
    }
    Ok(format!(
        "{} cases unique among {total} candidates (searched synapses {})",
        summary.len(),
        summary.join(" ")
    ))
}
