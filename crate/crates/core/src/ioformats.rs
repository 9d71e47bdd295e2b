// SPDX-License-Identifier: Apache-2.0

//! File formats.
//!
//! * hardware constants: JSON object, every key required.
//! * network: JSON object with `neurons`, `synapses` and `settings`.
//! * stimulus: line-oriented text, `AS <cycle> <neuron>` for an input spike
//!   and `AI <cycle> <neuron> <value>` for charge injection; `#` starts a
//!   comment.
//! * trace: an aligned text table, or JSON lines.
//!
//! Both JSON formats carry `"format": 1`. Unknown keys are rejected and
//! every number must be an integer.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::engine::{CycleReport, Stimulus, StimulusEvent, StimulusKind, Trace};
use crate::error::{Error, Result};
use crate::netmodel::{
    validate_network, HardwareConstants, Network, NeuronSettings, SynapseSettings,
    DEFAULT_INPUT_SPIKE_AMOUNT,
};

pub const FORMAT_VERSION: i64 = 1;

fn json_error(e: serde_json::Error) -> Error {
    Error::parse_at(e.line(), e.column(), e.to_string())
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct HardwareFile {
    format: i64,
    accumulator_width: u32,
    threshold_width: u32,
    weight_width: u32,
    max_delay: u32,
    max_leak: u32,
    max_abs_refractory: u32,
    max_rel_refractory: u32,
    ports: u32,
    injection_ports: u32,
    stdp_table: Vec<i64>,
}

pub fn load_hardware(text: &str) -> Result<HardwareConstants> {
    let f: HardwareFile = serde_json::from_str(text).map_err(json_error)?;
    check_format(f.format, "hardware file")?;
    Ok(HardwareConstants {
        accumulator_width_bits: f.accumulator_width,
        threshold_width_bits: f.threshold_width,
        weight_width_bits: f.weight_width,
        max_synapse_delay: f.max_delay,
        max_leak: f.max_leak,
        max_absolute_refractory: f.max_abs_refractory,
        max_relative_refractory: f.max_rel_refractory,
        ports_per_neuron: f.ports,
        injection_port_count: f.injection_ports,
        stdp_table: f.stdp_table,
    })
}

pub fn save_hardware(hw: &HardwareConstants) -> String {
    let f = HardwareFile {
        format: FORMAT_VERSION,
        accumulator_width: hw.accumulator_width_bits,
        threshold_width: hw.threshold_width_bits,
        weight_width: hw.weight_width_bits,
        max_delay: hw.max_synapse_delay,
        max_leak: hw.max_leak,
        max_abs_refractory: hw.max_absolute_refractory,
        max_rel_refractory: hw.max_relative_refractory,
        ports: hw.ports_per_neuron,
        injection_ports: hw.injection_port_count,
        stdp_table: hw.stdp_table.clone(),
    };
    let mut out = serde_json::to_string_pretty(&f).expect("plain struct serializes");
    out.push('\n');
    out
}

fn check_format(v: i64, what: &str) -> Result<()> {
    if v != FORMAT_VERSION {
        return Err(Error::parse(format!(
            "{what}: unsupported format {v}, expected {FORMAT_VERSION}"
        )));
    }
    Ok(())
}

/// Typed, key-checked view over one JSON object.
struct Fields<'a> {
    map: &'a Map<String, Value>,
    context: String,
    allowed: &'static [&'static str],
}

impl<'a> Fields<'a> {
    fn new(value: &'a Value, context: String, allowed: &'static [&'static str]) -> Result<Self> {
        let map = value
            .as_object()
            .ok_or_else(|| Error::parse(format!("{context}: expected an object")))?;
        if let Some(k) = map.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(Error::parse(format!("{context}: unknown key `{k}`")));
        }
        Ok(Self {
            map,
            context,
            allowed,
        })
    }

    fn get(&self, key: &str) -> Result<&'a Value> {
        debug_assert!(self.allowed.contains(&key));
        self.map
            .get(key)
            .ok_or_else(|| Error::parse(format!("{}: missing key `{key}`", self.context)))
    }

    fn int(&self, key: &str) -> Result<i64> {
        let v = self.get(key)?;
        v.as_i64().ok_or_else(|| {
            Error::parse(format!(
                "{}: key `{key}` must be an integer, got {v}",
                self.context
            ))
        })
    }

    fn opt_int(&self, key: &str) -> Result<Option<i64>> {
        match self.map.contains_key(key) {
            true => self.int(key).map(Some),
            false => Ok(None),
        }
    }

    fn boolean(&self, key: &str) -> Result<bool> {
        let v = self.get(key)?;
        v.as_bool().ok_or_else(|| {
            Error::parse(format!(
                "{}: key `{key}` must be true or false, got {v}",
                self.context
            ))
        })
    }

    fn opt_bool(&self, key: &str) -> Result<Option<bool>> {
        match self.map.contains_key(key) {
            true => self.boolean(key).map(Some),
            false => Ok(None),
        }
    }

    fn string(&self, key: &str) -> Result<&'a str> {
        let v = self.get(key)?;
        v.as_str().ok_or_else(|| {
            Error::parse(format!(
                "{}: key `{key}` must be a string, got {v}",
                self.context
            ))
        })
    }

    fn array(&self, key: &str) -> Result<&'a Vec<Value>> {
        let v = self.get(key)?;
        v.as_array().ok_or_else(|| {
            Error::parse(format!("{}: key `{key}` must be an array", self.context))
        })
    }
}

const NETWORK_KEYS: &[&str] = &["format", "neurons", "synapses", "settings"];
const NEURON_KEYS: &[&str] = &[
    "name",
    "threshold",
    "standard_resting",
    "refractory_resting",
    "abs_refractory",
    "rel_refractory",
    "leak",
    "injection",
];
const SYNAPSE_KEYS: &[&str] = &["from", "to", "weight", "delay"];
const SETTINGS_KEYS: &[&str] = &["stdp", "input_spike_amount"];

/// Parses a network file and resolves neuron references, without checking
/// it against any hardware.
pub fn parse_network(text: &str) -> Result<Network> {
    let root: Value = serde_json::from_str(text).map_err(json_error)?;
    let top = Fields::new(&root, "network".into(), NETWORK_KEYS)?;
    check_format(top.int("format")?, "network file")?;

    let mut neurons = Vec::new();
    for (i, v) in top.array("neurons")?.iter().enumerate() {
        let name = v
            .get("name")
            .and_then(Value::as_str)
            .map(|n| format!("neuron `{n}`"))
            .unwrap_or_else(|| format!("neuron #{i}"));
        let f = Fields::new(v, name, NEURON_KEYS)?;
        neurons.push(NeuronSettings {
            id: f.string("name")?.to_string(),
            threshold: f.int("threshold")?,
            standard_resting_potential: f.int("standard_resting")?,
            refractory_resting_potential: f.int("refractory_resting")?,
            absolute_refractory: f.int("abs_refractory")?,
            relative_refractory: f.int("rel_refractory")?,
            leak: f.int("leak")?,
            injection_enabled: f.boolean("injection")?,
        });
    }
    for (i, n) in neurons.iter().enumerate() {
        if neurons[..i].iter().any(|m| m.id == n.id) {
            return Err(Error::parse(format!("neuron `{}` declared twice", n.id)));
        }
    }

    let mut synapses = Vec::new();
    for (i, v) in top.array("synapses")?.iter().enumerate() {
        let f = Fields::new(v, format!("synapse #{i}"), SYNAPSE_KEYS)?;
        let s = SynapseSettings {
            pre: f.string("from")?.to_string(),
            post: f.string("to")?.to_string(),
            weight: f.int("weight")?,
            delay: f.int("delay")?,
        };
        for end in [&s.pre, &s.post] {
            if !neurons.iter().any(|n| &n.id == end) {
                return Err(Error::Reference {
                    name: end.clone(),
                    context: format!("synapse #{i}"),
                });
            }
        }
        synapses.push(s);
    }

    let mut net = Network {
        neurons,
        synapses,
        stdp_enabled: false,
        input_spike_amount: DEFAULT_INPUT_SPIKE_AMOUNT,
    };
    if let Some(settings) = top.map.get("settings") {
        let f = Fields::new(settings, "settings".into(), SETTINGS_KEYS)?;
        if let Some(stdp) = f.opt_bool("stdp")? {
            net.stdp_enabled = stdp;
        }
        if let Some(amount) = f.opt_int("input_spike_amount")? {
            net.input_spike_amount = amount;
        }
    }
    Ok(net)
}

/// Parses a network file and checks it against `hw`.
pub fn load_network(text: &str, hw: &HardwareConstants) -> Result<Network> {
    let net = parse_network(text)?;
    let report = validate_network(&net, hw);
    if !report.ok() {
        return Err(Error::Validation(report));
    }
    Ok(net)
}

pub fn save_network(net: &Network) -> String {
    let neurons: Vec<Value> = net
        .neurons
        .iter()
        .map(|n| {
            json!({
                "name": n.id,
                "threshold": n.threshold,
                "standard_resting": n.standard_resting_potential,
                "refractory_resting": n.refractory_resting_potential,
                "abs_refractory": n.absolute_refractory,
                "rel_refractory": n.relative_refractory,
                "leak": n.leak,
                "injection": n.injection_enabled,
            })
        })
        .collect();
    let synapses: Vec<Value> = net
        .synapses
        .iter()
        .map(|s| {
            json!({
                "from": s.pre,
                "to": s.post,
                "weight": s.weight,
                "delay": s.delay,
            })
        })
        .collect();
    let doc = json!({
        "format": FORMAT_VERSION,
        "neurons": neurons,
        "synapses": synapses,
        "settings": {
            "stdp": net.stdp_enabled,
            "input_spike_amount": net.input_spike_amount,
        },
    });
    let mut out = serde_json::to_string_pretty(&doc).expect("json value serializes");
    out.push('\n');
    out
}

/// Parses a stimulus file. Events come back sorted by cycle; events on the
/// same cycle keep their file order.
pub fn load_stimulus(text: &str, net: &Network) -> Result<Stimulus> {
    let mut events = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("");
        let tokens: Vec<(usize, &str)> = tokenize(line);
        let Some(&(_, op)) = tokens.first() else {
            continue;
        };
        let expected = match op {
            "AS" => 3,
            "AI" => 4,
            _ => {
                return Err(Error::parse_at(
                    line_no,
                    tokens[0].0,
                    format!("unknown directive `{op}`, expected AS or AI"),
                ))
            }
        };
        if tokens.len() != expected {
            let col = tokens.get(expected).map_or(line.len() + 1, |t| t.0);
            return Err(Error::parse_at(
                line_no,
                col,
                format!("`{op}` takes {} arguments", expected - 1),
            ));
        }
        let (cycle_col, cycle_text) = tokens[1];
        let cycle: u64 = cycle_text.parse().map_err(|_| {
            Error::parse_at(
                line_no,
                cycle_col,
                format!("cycle must be a non-negative integer, got `{cycle_text}`"),
            )
        })?;
        let name = tokens[2].1;
        if net.neuron_index(name).is_none() {
            return Err(Error::Reference {
                name: name.to_string(),
                context: format!("stimulus line {line_no}"),
            });
        }
        let event = if op == "AS" {
            StimulusEvent::spike(cycle, name)
        } else {
            let (col, text) = tokens[3];
            let value: i64 = text.parse().map_err(|_| {
                Error::parse_at(
                    line_no,
                    col,
                    format!("injection value must be an integer, got `{text}`"),
                )
            })?;
            StimulusEvent::inject(cycle, name, value)
        };
        events.push(event);
    }
    Ok(Stimulus::new(events))
}

/// Writes `stim` in the stimulus file syntax, one event per line.
pub fn save_stimulus(stim: &Stimulus) -> String {
    let mut out = String::new();
    for e in &stim.events {
        let _ = match e.kind {
            StimulusKind::InputSpike => writeln!(out, "AS {} {}", e.cycle, e.neuron),
            StimulusKind::Injection => writeln!(out, "AI {} {} {}", e.cycle, e.neuron, e.value),
        };
    }
    out
}

/// Whitespace-separated tokens with their 1-based byte columns.
fn tokenize(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in line.char_indices() {
        match (c.is_whitespace(), start) {
            (false, None) => start = Some(i),
            (true, Some(s)) => {
                out.push((s + 1, &line[s..i]));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((s + 1, &line[s..]));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceFormat {
    Table,
    Jsonl,
}

impl std::str::FromStr for TraceFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "table" => Ok(TraceFormat::Table),
            "jsonl" => Ok(TraceFormat::Jsonl),
            other => Err(Error::InvalidArgument(format!(
                "unknown trace format `{other}`, expected table or jsonl"
            ))),
        }
    }
}

pub fn format_trace(trace: &Trace, format: TraceFormat) -> String {
    match format {
        TraceFormat::Table => format_table(trace),
        TraceFormat::Jsonl => format_jsonl(trace),
    }
}

fn fired_names(trace: &Trace, report: &CycleReport) -> String {
    if report.fired.is_empty() {
        return "-".into();
    }
    report
        .fired
        .iter()
        .map(|&n| trace.neurons[n].as_str())
        .collect::<Vec<_>>()
        .join(",")
}

fn format_table(trace: &Trace) -> String {
    let fired: Vec<String> = trace.cycles.iter().map(|r| fired_names(trace, r)).collect();
    let cycle_w = trace
        .cycles
        .iter()
        .map(|r| r.cycle.to_string().len())
        .chain(["Cycle".len()])
        .max()
        .unwrap_or(5);
    let fired_w = fired.iter().map(String::len).chain(["Fired".len()]).max().unwrap_or(5);
    let charge_w: Vec<usize> = trace
        .neurons
        .iter()
        .enumerate()
        .map(|(i, name)| {
            trace
                .cycles
                .iter()
                .map(|r| r.charges[i].to_string().len())
                .chain([name.len()])
                .max()
                .unwrap_or(0)
        })
        .collect();

    let mut out = String::new();
    let _ = write!(out, "{:>cycle_w$}  {:<fired_w$}", "Cycle", "Fired");
    for (name, w) in trace.neurons.iter().zip(&charge_w) {
        let _ = write!(out, "  {name:>w$}");
    }
    out.push('\n');
    for (r, f) in trace.cycles.iter().zip(&fired) {
        let _ = write!(out, "{:>cycle_w$}  {f:<fired_w$}", r.cycle);
        for (c, w) in r.charges.iter().zip(&charge_w) {
            let _ = write!(out, "  {c:>w$}");
        }
        out.push('\n');
    }
    out
}

fn format_jsonl(trace: &Trace) -> String {
    let mut out = String::new();
    for r in &trace.cycles {
        let mut charges = Map::new();
        for (name, c) in trace.neurons.iter().zip(&r.charges) {
            charges.insert(name.clone(), json!(c));
        }
        let fired: Vec<&str> = r.fired.iter().map(|&n| trace.neurons[n].as_str()).collect();
        let line = json!({ "cycle": r.cycle, "fired": fired, "charges": charges });
        out.push_str(&line.to_string());
        out.push('\n');
    }
    out
}

/// Parses JSON-lines trace output. The neuron order is taken from the key
/// order of the first line's `charges`.
pub fn parse_trace_jsonl(text: &str) -> Result<Trace> {
    let mut trace = Trace::default();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let at = |msg: String| Error::parse_at(line_no, 1, msg);
        let v: Value = serde_json::from_str(line)
            .map_err(|e| Error::parse_at(line_no, e.column(), e.to_string()))?;
        let f = Fields::new(&v, format!("line {line_no}"), &["cycle", "fired", "charges"])?;
        let cycle = f.int("cycle")?;
        let cycle = u64::try_from(cycle).map_err(|_| at(format!("negative cycle {cycle}")))?;
        let charges = f
            .get("charges")?
            .as_object()
            .ok_or_else(|| at("`charges` must be an object".into()))?;

        if trace.cycles.is_empty() && trace.neurons.is_empty() {
            trace.neurons = charges.keys().cloned().collect();
        }
        if charges.len() != trace.neurons.len()
            || !trace.neurons.iter().all(|n| charges.contains_key(n))
        {
            return Err(at("`charges` keys differ from the first line".into()));
        }
        let mut values = Vec::with_capacity(trace.neurons.len());
        for name in &trace.neurons {
            let v = charges[name]
                .as_i64()
                .ok_or_else(|| at(format!("charge of `{name}` must be an integer")))?;
            values.push(v);
        }

        let mut fired = Vec::new();
        for v in f.array("fired")? {
            let name = v
                .as_str()
                .ok_or_else(|| at("`fired` entries must be strings".into()))?;
            let idx = trace
                .neurons
                .iter()
                .position(|n| n == name)
                .ok_or_else(|| Error::Reference {
                    name: name.to_string(),
                    context: format!("trace line {line_no}"),
                })?;
            fired.push(idx);
        }
        fired.sort_unstable();
        fired.dedup();

        trace.cycles.push(CycleReport {
            cycle,
            fired,
            charges: values,
        });
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;

    const HW: &str = r#"{
        "format": 1,
        "accumulator_width": 16, "threshold_width": 8, "weight_width": 4,
        "max_delay": 7, "max_leak": 3, "max_abs_refractory": 3, "max_rel_refractory": 3,
        "ports": 8, "injection_ports": 2, "stdp_table": [1, 2, -1]
    }"#;

    fn net_json(neuron_extra: &str) -> String {
        format!(
            r#"{{
            "format": 1,
            "neurons": [
                {{"name": "Main", "threshold": 1, "standard_resting": 0, "refractory_resting": 0,
                  "abs_refractory": 0, "rel_refractory": 0, "leak": 0, "injection": false{neuron_extra}}},
                {{"name": "Out", "threshold": 2, "standard_resting": -1, "refractory_resting": -1,
                  "abs_refractory": 0, "rel_refractory": 0, "leak": 1, "injection": true}}
            ],
            "synapses": [{{"from": "Main", "to": "Out", "weight": 2, "delay": 0}}],
            "settings": {{"stdp": true}}
        }}"#
        )
    }

    #[test]
    fn hardware_loads() {
        let hw = load_hardware(HW).unwrap();
        assert_eq!(hw.weight_width_bits, 4);
        assert_eq!(hw.stdp_table, vec![1, 2, -1]);
        assert_eq!(load_hardware(&save_hardware(&hw)).unwrap(), hw);
    }

    #[test]
    fn hardware_rejects_unknown_missing_and_float() {
        let unknown = HW.replace("\"ports\": 8", "\"ports\": 8, \"colour\": 1");
        assert!(load_hardware(&unknown).is_err());
        let missing = HW.replace("\"max_leak\": 3,", "");
        let err = load_hardware(&missing).unwrap_err().to_string();
        assert!(err.contains("max_leak"), "{err}");
        let float = HW.replace("\"ports\": 8", "\"ports\": 8.0");
        assert!(load_hardware(&float).is_err());
        let version = HW.replace("\"format\": 1", "\"format\": 2");
        assert!(load_hardware(&version).is_err());
    }

    #[test]
    fn network_loads_with_default_input_amount() {
        let hw = load_hardware(HW).unwrap();
        let net = load_network(&net_json(""), &hw).unwrap();
        assert_eq!(net.neurons.len(), 2);
        assert!(net.stdp_enabled);
        assert_eq!(net.input_spike_amount, 16);
        assert_eq!(net.neurons[1].standard_resting_potential, -1);
        assert!(net.neurons[1].injection_enabled);
    }

    #[test]
    fn missing_threshold_names_neuron_and_key() {
        let text = net_json("").replacen("\"threshold\": 1, ", "", 1);
        let err = parse_network(&text).unwrap_err().to_string();
        assert!(err.contains("Main") && err.contains("threshold"), "{err}");
    }

    #[test]
    fn float_setting_rejected() {
        let text = net_json("").replacen("\"threshold\": 1", "\"threshold\": 1.5", 1);
        assert!(parse_network(&text).is_err());
    }

    #[test]
    fn unknown_neuron_key_rejected() {
        assert!(parse_network(&net_json(", \"colour\": 3")).is_err());
    }

    #[test]
    fn unknown_synapse_endpoint() {
        let text = net_json("").replace("\"to\": \"Out\"", "\"to\": \"Nowhere\"");
        assert!(matches!(parse_network(&text), Err(Error::Reference { .. })));
    }

    #[test]
    fn bounds_are_validation_errors_with_rule_names() {
        let hw = load_hardware(HW).unwrap();
        let text = net_json("").replace("\"weight\": 2", "\"weight\": 8");
        match load_network(&text, &hw) {
            Err(Error::Validation(r)) => assert!(r.has_rule(crate::netmodel::RULE_WEIGHT)),
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn syntax_error_has_position() {
        match parse_network("{\n  \"format\": 1,\n  oops\n}") {
            Err(Error::Parse { line, column, .. }) => {
                assert_eq!(line, 3);
                assert!(column > 0);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn stimulus_parsing() {
        let hw = load_hardware(HW).unwrap();
        let net = load_network(&net_json(""), &hw).unwrap();
        let stim = load_stimulus("AS 0 Main", &net).unwrap();
        assert_eq!(stim.events, vec![StimulusEvent::spike(0, "Main")]);

        let text = "# header\nAI 5 Out -2  # injected\n\nAS 3 Main\nAS 5 Main\n";
        let stim = load_stimulus(text, &net).unwrap();
        assert_eq!(
            stim.events,
            vec![
                StimulusEvent::spike(3, "Main"),
                StimulusEvent::inject(5, "Out", -2),
                StimulusEvent::spike(5, "Main"),
            ]
        );
        assert_eq!(load_stimulus(&save_stimulus(&stim), &net).unwrap(), stim);
    }

    #[test]
    fn stimulus_errors() {
        let hw = load_hardware(HW).unwrap();
        let net = load_network(&net_json(""), &hw).unwrap();
        match load_stimulus("AS 0 Main\nAS -1 Main", &net) {
            Err(Error::Parse { line, column, .. }) => assert_eq!((line, column), (2, 4)),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            load_stimulus("XX 0 Main", &net),
            Err(Error::Parse { line: 1, column: 1, .. })
        ));
        assert!(load_stimulus("AI 0 Out", &net).is_err());
        assert!(load_stimulus("AS 0 Main 3", &net).is_err());
        assert!(matches!(
            load_stimulus("AS 0 Ghost", &net),
            Err(Error::Reference { .. })
        ));
    }

    fn sample_trace() -> Trace {
        Trace {
            neurons: vec!["Main".into(), "Bias".into()],
            cycles: vec![
                CycleReport {
                    cycle: 0,
                    fired: vec![],
                    charges: vec![16, 0],
                },
                CycleReport {
                    cycle: 1,
                    fired: vec![0, 1],
                    charges: vec![-12, 1],
                },
            ],
        }
    }

    #[test]
    fn table_layout() {
        let text = format_trace(&sample_trace(), TraceFormat::Table);
        let expected = "\
Cycle  Fired      Main  Bias
    0  -            16     0
    1  Main,Bias   -12     1
";
        assert_eq!(text, expected);
    }

    #[test]
    fn jsonl_layout_and_parse_back() {
        let trace = sample_trace();
        let text = format_trace(&trace, TraceFormat::Jsonl);
        assert_eq!(
            text.lines().next().unwrap(),
            r#"{"cycle":0,"fired":[],"charges":{"Main":16,"Bias":0}}"#
        );
        assert_eq!(parse_trace_jsonl(&text).unwrap(), trace);
    }
}
