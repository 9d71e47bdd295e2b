// SPDX-License-Identifier: Apache-2.0

//! Browser bindings. Every operation is a plain function returning JSON text
//! so it can be tested natively; the `#[wasm_bindgen]` exports only convert
//! errors.

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use snn_core::engine::Engine;
use snn_core::goldens::{builtin_cases, compare, GoldenCase};
use snn_core::ioformats::{load_hardware, load_network, load_stimulus, save_hardware, save_network, save_stimulus};
use snn_core::plasticity::StdpTable;
use snn_core::{min_accumulator_width, Trace};

/// Keeps a typo in the cycle box from hanging the tab.
pub const MAX_CYCLES: u64 = 5000;

fn fixture(name: &str) -> Result<GoldenCase, String> {
    builtin_cases()
        .into_iter()
        .find(|c| c.name == name)
        .ok_or_else(|| format!("no fixture named `{name}`"))
}

/// `[{name, cycles, notes}]` for the built-in cases.
pub fn fixtures() -> String {
    let list: Vec<Value> = builtin_cases()
        .iter()
        .map(|c| json!({"name": c.name, "cycles": c.cycles, "notes": c.notes}))
        .collect();
    Value::Array(list).to_string()
}

/// Source texts of a fixture, for the editor panes.
pub fn fixture_sources(name: &str) -> Result<String, String> {
    let c = fixture(name)?;
    Ok(json!({
        "hardware": save_hardware(&c.hardware),
        "network": save_network(&c.network),
        "stimulus": save_stimulus(&c.stimulus),
        "cycles": c.cycles,
    })
    .to_string())
}

fn trace_json(trace: &Trace) -> Value {
    let rows: Vec<Value> = trace
        .cycles
        .iter()
        .map(|r| {
            let fired: Vec<&str> = r.fired.iter().map(|&i| trace.neurons[i].as_str()).collect();
            json!({"cycle": r.cycle, "fired": fired, "charges": r.charges})
        })
        .collect();
    json!({"neurons": trace.neurons, "cycles": rows})
}

/// Simulates the given sources. The result carries the trace plus the weight
/// of every synapse at the end of each cycle.
pub fn simulate(hardware: &str, network: &str, stimulus: &str, cycles: u64) -> Result<String, String> {
    if cycles > MAX_CYCLES {
        return Err(format!("at most {MAX_CYCLES} cycles"));
    }
    let hw = load_hardware(hardware).map_err(|e| format!("hardware: {e}"))?;
    let net = load_network(network, &hw).map_err(|e| format!("network: {e}"))?;
    let stim = load_stimulus(stimulus, &net).map_err(|e| format!("stimulus: {e}"))?;
    let mut engine = Engine::new(&net, &hw, &stim).map_err(|e| e.to_string())?;

    let mut trace = Trace::new(net.neurons.iter().map(|n| n.id.clone()).collect());
    let mut weights = Vec::with_capacity(cycles as usize);
    for _ in 0..cycles {
        trace.cycles.push(engine.step());
        weights.push(engine.weights());
    }
    let synapses: Vec<String> = net
        .synapses
        .iter()
        .map(|s| format!("{}->{}", s.pre, s.post))
        .collect();
    let mut out = trace_json(&trace);
    out["synapses"] = json!(synapses);
    out["weights"] = json!(weights);
    out["threshold"] = json!(net.neurons.iter().map(|n| n.threshold).collect::<Vec<_>>());
    Ok(out.to_string())
}

/// Runs a fixture and compares it with its expected trace.
pub fn check_fixture(name: &str) -> Result<String, String> {
    let c = fixture(name)?;
    let actual = Engine::new(&c.network, &c.hardware, &c.stimulus)
        .map_err(|e| e.to_string())?
        .run(c.cycles);
    let divergence = compare(&c.expected, &actual).map(|d| {
        json!({"cycle": d.cycle, "neuron": d.neuron, "text": d.to_string()})
    });
    Ok(json!({
        "name": c.name,
        "passed": divergence.is_none(),
        "divergence": divergence,
        "expected": trace_json(&c.expected),
        "actual": trace_json(&actual),
    })
    .to_string())
}

/// Accumulator width for the given weight width, port count and injection
/// ports, plus the STDP weight change for every delivery-to-exceed gap of the
/// comma-separated `table`.
pub fn sizing(weight_bits: u32, ports: u32, injection_ports: u32, table: &str) -> Result<String, String> {
    let width = min_accumulator_width(weight_bits, ports, injection_ports).map_err(|e| e.to_string())?;
    let values = table
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<i64>().map_err(|_| format!("bad table entry `{s}`")))
        .collect::<Result<Vec<_>, _>>()?;
    let stdp = StdpTable::new(values);
    let exceed = 100u64;
    let curve: Vec<Value> = (0..=stdp.len() as u64 + 1)
        .map(|gap| {
            json!({
                "gap": gap,
                "potentiation": stdp.potentiation(exceed, exceed - gap),
                "depression": if gap == 0 { None } else { stdp.depression(exceed + gap, exceed) },
            })
        })
        .collect();
    Ok(json!({"accumulator_width": width, "stdp": curve}).to_string())
}

fn js<T>(r: Result<T, String>) -> Result<T, JsValue> {
    r.map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = fixtures)]
pub fn js_fixtures() -> String {
    fixtures()
}

#[wasm_bindgen(js_name = fixtureSources)]
pub fn js_fixture_sources(name: &str) -> Result<String, JsValue> {
    js(fixture_sources(name))
}

#[wasm_bindgen(js_name = simulate)]
pub fn js_simulate(hardware: &str, network: &str, stimulus: &str, cycles: u32) -> Result<String, JsValue> {
    js(simulate(hardware, network, stimulus, cycles as u64))
}

#[wasm_bindgen(js_name = checkFixture)]
pub fn js_check_fixture(name: &str) -> Result<String, JsValue> {
    js(check_fixture(name))
}

#[wasm_bindgen(js_name = sizing)]
pub fn js_sizing(weight_bits: u32, ports: u32, injection_ports: u32, table: &str) -> Result<String, JsValue> {
    js(sizing(weight_bits, ports, injection_ports, table))
}
