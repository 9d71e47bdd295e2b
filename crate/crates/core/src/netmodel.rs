// SPDX-License-Identifier: Apache-2.0

//! Hardware constants, network settings and their validation.
//!
//! A [`HardwareConstants`] value describes a built processor: register
//! widths, setting maxima, port counts and the STDP lookup table. A
//! [`Network`] is the program loaded onto it. [`validate_network`] checks the
//! program against the hardware and reports every violated bound as data.

use std::collections::HashMap;
use std::fmt::{self, Write as _};

use crate::error::{Error, Result};

/// Widest register the simulator models. Charges are held in `i64`.
pub const MAX_REGISTER_BITS: u32 = 62;

/// Parameters fixed when a processor is built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HardwareConstants {
    pub accumulator_width_bits: u32,
    pub threshold_width_bits: u32,
    pub weight_width_bits: u32,
    pub max_synapse_delay: u32,
    pub max_leak: u32,
    pub max_absolute_refractory: u32,
    pub max_relative_refractory: u32,
    pub ports_per_neuron: u32,
    /// Ports given over to charge injection on neurons that enable it.
    pub injection_port_count: u32,
    /// Empty disables STDP in hardware.
    pub stdp_table: Vec<i64>,
}

impl HardwareConstants {
    pub fn weight_range(&self) -> (i64, i64) {
        signed_range(self.weight_width_bits)
    }

    pub fn threshold_range(&self) -> (i64, i64) {
        signed_range(self.threshold_width_bits)
    }

    pub fn accumulator_range(&self) -> (i64, i64) {
        signed_range(self.accumulator_width_bits)
    }

    /// Range of a value delivered through the injection ports.
    pub fn injection_range(&self) -> Option<(i64, i64)> {
        (self.injection_port_count > 0).then(|| signed_range(self.injection_port_count))
    }

    /// Number of pre-synapses a neuron may carry.
    pub fn port_budget(&self, injection_enabled: bool) -> u32 {
        if injection_enabled {
            self.ports_per_neuron.saturating_sub(self.injection_port_count)
        } else {
            self.ports_per_neuron
        }
    }

    /// Ring slots needed to hold every in-flight delivery.
    pub fn delivery_slots(&self) -> usize {
        self.max_synapse_delay as usize + 1
    }

    pub fn min_accumulator_width(&self) -> Result<u32> {
        min_accumulator_width(
            self.weight_width_bits,
            self.ports_per_neuron,
            self.injection_port_count,
        )
    }

    /// Violations of the constants themselves, independent of any network.
    pub fn violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut bad = |message: String| {
            out.push(Violation::new("hardware", RULE_HARDWARE, message));
        };
        for (name, bits) in [
            ("accumulator_width", self.accumulator_width_bits),
            ("threshold_width", self.threshold_width_bits),
            ("weight_width", self.weight_width_bits),
        ] {
            if bits == 0 || bits > MAX_REGISTER_BITS {
                bad(format!("{name} = {bits}, must be in 1..={MAX_REGISTER_BITS}"));
            }
        }
        if self.ports_per_neuron == 0 {
            bad("ports must be at least 1".into());
        }
        if self.injection_port_count > self.ports_per_neuron {
            bad(format!(
                "injection_ports = {} exceeds ports = {}",
                self.injection_port_count, self.ports_per_neuron
            ));
        }
        if self.injection_port_count > MAX_REGISTER_BITS {
            bad(format!(
                "injection_ports = {} is wider than {MAX_REGISTER_BITS} bits",
                self.injection_port_count
            ));
        }
        if !out.is_empty() {
            return out;
        }
        match self.min_accumulator_width() {
            Ok(min) if self.accumulator_width_bits < min => out.push(Violation::new(
                "hardware",
                RULE_ACCUMULATOR,
                format!(
                    "accumulator_width = {} is below the minimum {min} for weight_width = {}, ports = {}, injection_ports = {}",
                    self.accumulator_width_bits,
                    self.weight_width_bits,
                    self.ports_per_neuron,
                    self.injection_port_count
                ),
            )),
            Ok(_) => {}
            Err(e) => out.push(Violation::new("hardware", RULE_HARDWARE, e.to_string())),
        }
        out
    }
}

/// Two's-complement bounds of an `bits`-wide register.
pub fn signed_range(bits: u32) -> (i64, i64) {
    let bits = bits.clamp(1, 63);
    let half = 1i64 << (bits - 1);
    (-half, half - 1)
}

/// Smallest accumulator width that cannot overflow while summing one
/// cycle's worst-case input.
///
/// The worst case is the larger of `S` saturated synapses, or `S - C`
/// saturated synapses plus a full-scale `C`-bit injection value, each synapse
/// contributing at most `2^W - 1`. The result is `ceil(log2(max))`, computed
/// as the bit length of `max - 1` so no floating point is involved.
pub fn min_accumulator_width(weight_bits: u32, ports: u32, injection_ports: u32) -> Result<u32> {
    if weight_bits == 0 {
        return Err(Error::InvalidArgument("weight width must be at least 1".into()));
    }
    if ports == 0 {
        return Err(Error::InvalidArgument("port count must be at least 1".into()));
    }
    if injection_ports > ports {
        return Err(Error::InvalidArgument(format!(
            "injection ports ({injection_ports}) exceed ports ({ports})"
        )));
    }
    if weight_bits > 64 || injection_ports > 64 {
        return Err(Error::InvalidArgument(
            "widths above 64 bits are not supported".into(),
        ));
    }

    let weight_max = (1u128 << weight_bits) - 1;
    let injection_max = (1u128 << injection_ports) - 1;
    let ports = ports as u128;
    let injection_ports = injection_ports as u128;

    let with_injection = weight_max * (ports - injection_ports) + injection_max;
    let synapses_only = weight_max * ports;
    let worst = with_injection.max(synapses_only);

    Ok(ceil_log2(worst))
}

fn ceil_log2(x: u128) -> u32 {
    if x <= 1 {
        0
    } else {
        128 - (x - 1).leading_zeros()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NeuronSettings {
    pub id: String,
    pub threshold: i64,
    pub standard_resting_potential: i64,
    pub refractory_resting_potential: i64,
    pub absolute_refractory: i64,
    pub relative_refractory: i64,
    pub leak: i64,
    pub injection_enabled: bool,
}

impl NeuronSettings {
    /// Threshold 1, everything else zero.
    pub fn new(id: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            threshold: 1,
            standard_resting_potential: 0,
            refractory_resting_potential: 0,
            absolute_refractory: 0,
            relative_refractory: 0,
            leak: 0,
            injection_enabled: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SynapseSettings {
    pub pre: String,
    pub post: String,
    pub weight: i64,
    pub delay: i64,
}

impl SynapseSettings {
    pub fn new(pre: impl Into<String>, post: impl Into<String>, weight: i64, delay: i64) -> Self {
        Self {
            pre: pre.into(),
            post: post.into(),
            weight,
            delay,
        }
    }
}

pub const DEFAULT_INPUT_SPIKE_AMOUNT: i64 = 16;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Network {
    pub neurons: Vec<NeuronSettings>,
    pub synapses: Vec<SynapseSettings>,
    pub stdp_enabled: bool,
    /// Charge added by an external input spike.
    pub input_spike_amount: i64,
}

impl Default for Network {
    fn default() -> Self {
        Self {
            neurons: Vec::new(),
            synapses: Vec::new(),
            stdp_enabled: false,
            input_spike_amount: DEFAULT_INPUT_SPIKE_AMOUNT,
        }
    }
}

impl Network {
    pub fn neuron_index(&self, id: &str) -> Option<usize> {
        self.neurons.iter().position(|n| n.id == id)
    }

    pub fn neuron(&self, id: &str) -> Option<&NeuronSettings> {
        self.neurons.iter().find(|n| n.id == id)
    }

    /// Pre-synapse count per neuron, in declaration order. Synapses with an
    /// unknown post-neuron are not counted.
    pub fn pre_synapse_counts(&self) -> Vec<usize> {
        let index: HashMap<&str, usize> = self
            .neurons
            .iter()
            .enumerate()
            .map(|(i, n)| (n.id.as_str(), i))
            .collect();
        let mut counts = vec![0; self.neurons.len()];
        for s in &self.synapses {
            if let Some(&i) = index.get(s.post.as_str()) {
                counts[i] += 1;
            }
        }
        counts
    }
}

pub const RULE_HARDWARE: &str = "invalid hardware constants";
pub const RULE_ACCUMULATOR: &str = "accumulator too narrow";
pub const RULE_DUPLICATE: &str = "duplicate neuron";
pub const RULE_UNKNOWN: &str = "unknown neuron";
pub const RULE_THRESHOLD: &str = "threshold out of range";
pub const RULE_RESTING: &str = "resting potential out of range";
pub const RULE_ABS_REFRACTORY: &str = "absolute refractory out of range";
pub const RULE_REL_REFRACTORY: &str = "relative refractory out of range";
pub const RULE_LEAK: &str = "leak out of range";
pub const RULE_WEIGHT: &str = "weight out of range";
pub const RULE_DELAY: &str = "delay out of range";
pub const RULE_PORTS: &str = "port budget exceeded";
pub const RULE_INPUT_AMOUNT: &str = "input spike amount out of range";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub entity: String,
    pub rule: &'static str,
    pub message: String,
}

impl Violation {
    fn new(entity: impl Into<String>, rule: &'static str, message: impl Into<String>) -> Self {
        Self {
            entity: entity.into(),
            rule,
            message: message.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}: {}", self.entity, self.rule, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    /// `None` when the hardware constants are too broken to evaluate.
    pub min_accumulator_width: Option<u32>,
}

impl ValidationReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has_rule(&self, rule: &str) -> bool {
        self.violations.iter().any(|v| v.rule == rule)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.min_accumulator_width {
            Some(w) => writeln!(f, "min accumulator width: {w}")?,
            None => writeln!(f, "min accumulator width: n/a")?,
        }
        if self.ok() {
            return writeln!(f, "ok");
        }
        writeln!(f, "{} violation(s):", self.violations.len())?;
        for v in &self.violations {
            writeln!(f, "  {v}")?;
        }
        Ok(())
    }
}

fn neuron_entity(id: &str) -> String {
    format!("neuron `{id}`")
}

fn synapse_entity(index: usize, s: &SynapseSettings) -> String {
    format!("synapse #{index} ({} -> {})", s.pre, s.post)
}

/// Checks every bound the hardware imposes on `net`.
pub fn validate_network(net: &Network, hw: &HardwareConstants) -> ValidationReport {
    let mut violations = hw.violations();
    let min_accumulator_width = hw.min_accumulator_width().ok();

    let (t_lo, t_hi) = hw.threshold_range();
    let (a_lo, a_hi) = hw.accumulator_range();
    let (w_lo, w_hi) = hw.weight_range();
    let in_range = |v: i64, lo: i64, hi: i64| lo <= v && v <= hi;

    let mut seen: HashMap<&str, usize> = HashMap::new();
    for n in &net.neurons {
        let entity = neuron_entity(&n.id);
        if seen.insert(n.id.as_str(), 0).is_some() {
            violations.push(Violation::new(
                &entity,
                RULE_DUPLICATE,
                "neuron id declared more than once",
            ));
        }
        if !in_range(n.threshold, t_lo, t_hi) {
            violations.push(Violation::new(
                &entity,
                RULE_THRESHOLD,
                format!("threshold {} outside [{t_lo}, {t_hi}]", n.threshold),
            ));
        }
        for (what, v) in [
            ("standard", n.standard_resting_potential),
            ("refractory", n.refractory_resting_potential),
        ] {
            if !in_range(v, a_lo, a_hi) {
                violations.push(Violation::new(
                    &entity,
                    RULE_RESTING,
                    format!("{what} resting potential {v} outside [{a_lo}, {a_hi}]"),
                ));
            }
        }
        let bounded = [
            (
                RULE_ABS_REFRACTORY,
                "absolute refractory",
                n.absolute_refractory,
                hw.max_absolute_refractory,
            ),
            (
                RULE_REL_REFRACTORY,
                "relative refractory",
                n.relative_refractory,
                hw.max_relative_refractory,
            ),
            (RULE_LEAK, "leak", n.leak, hw.max_leak),
        ];
        for (rule, what, v, max) in bounded {
            if !in_range(v, 0, max as i64) {
                violations.push(Violation::new(
                    &entity,
                    rule,
                    format!("{what} {v} outside [0, {max}]"),
                ));
            }
        }
    }

    for (i, s) in net.synapses.iter().enumerate() {
        let entity = synapse_entity(i, s);
        for end in [&s.pre, &s.post] {
            if net.neuron_index(end).is_none() {
                violations.push(Violation::new(
                    &entity,
                    RULE_UNKNOWN,
                    format!("no neuron named `{end}`"),
                ));
            }
        }
        if !in_range(s.weight, w_lo, w_hi) {
            violations.push(Violation::new(
                &entity,
                RULE_WEIGHT,
                format!("weight {} outside [{w_lo}, {w_hi}]", s.weight),
            ));
        }
        if !in_range(s.delay, 0, hw.max_synapse_delay as i64) {
            violations.push(Violation::new(
                &entity,
                RULE_DELAY,
                format!("delay {} outside [0, {}]", s.delay, hw.max_synapse_delay),
            ));
        }
    }

    for (n, count) in net.neurons.iter().zip(net.pre_synapse_counts()) {
        let budget = hw.port_budget(n.injection_enabled);
        if count > budget as usize {
            violations.push(Violation::new(
                neuron_entity(&n.id),
                RULE_PORTS,
                format!(
                    "{count} pre-synapses but only {budget} ports available{}",
                    if n.injection_enabled {
                        " with injection enabled"
                    } else {
                        ""
                    }
                ),
            ));
        }
    }

    if !in_range(net.input_spike_amount, a_lo, a_hi) {
        violations.push(Violation::new(
            "settings",
            RULE_INPUT_AMOUNT,
            format!(
                "input_spike_amount {} outside [{a_lo}, {a_hi}]",
                net.input_spike_amount
            ),
        ));
    }

    ValidationReport {
        violations,
        min_accumulator_width,
    }
}

/// Human-readable summary of what `hw` implies for `net`.
pub fn resource_report(net: &Network, hw: &HardwareConstants) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "neurons: {}", net.neurons.len());
    let _ = writeln!(out, "synapses: {}", net.synapses.len());
    let _ = writeln!(
        out,
        "ports per neuron: {} ({} reserved for injection when enabled)",
        hw.ports_per_neuron, hw.injection_port_count
    );

    let counts = net.pre_synapse_counts();
    if !net.neurons.is_empty() {
        let width = net.neurons.iter().map(|n| n.id.len()).max().unwrap_or(0);
        let _ = writeln!(out, "port usage:");
        for (n, used) in net.neurons.iter().zip(&counts) {
            let budget = hw.port_budget(n.injection_enabled);
            let injection = if n.injection_enabled {
                format!(" + {} injection", hw.injection_port_count)
            } else {
                String::new()
            };
            let _ = writeln!(out, "  {:<width$}  {used}/{budget}{injection}", n.id);
        }
    }

    match hw.min_accumulator_width() {
        Ok(w) => {
            let _ = writeln!(out, "min accumulator width: {w}");
        }
        Err(e) => {
            let _ = writeln!(out, "min accumulator width: n/a ({e})");
        }
    }
    let _ = writeln!(out, "accumulator width: {}", hw.accumulator_width_bits);

    let t = hw.stdp_table.len();
    if t == 0 {
        let _ = writeln!(out, "stdp table size: 0 (disabled)");
    } else {
        let potentiation = t / 2 + 1;
        let _ = writeln!(
            out,
            "stdp table size: {t} (potentiation {potentiation}, depression {})",
            t - potentiation
        );
    }
    let _ = writeln!(out, "delivery buffer slots: {}", hw.delivery_slots());
    out
}
