// SPDX-License-Identifier: Apache-2.0

//! Cycle-accurate execution of a loaded network.
//!
//! Every integration cycle `t` runs four phases in a fixed order:
//!
//! 1. **fire**: neurons that ended `t - 1` above threshold spike, schedule a
//!    delivery on each out-synapse for `t + delay`, reset their potential and
//!    enter their refractory sequence.
//! 2. **leak**: potentials above the active resting potential decay toward it.
//!    Absolutely refractory neurons do not leak.
//! 3. **deliver**: due synapses add their *current* weight to the post-neuron,
//!    then external stimuli for `t` are applied. Absolutely refractory
//!    neurons discard the charge, but the delivery still counts for STDP.
//! 4. **settle**: threshold comparison (strict), STDP, then resting-potential
//!    floors and refractory counters.
//!
//! The charge recorded for a cycle is sampled after the threshold comparison
//! and before the floors are applied, so a potential pushed below its floor
//! shows up for one cycle before it is restored.

mod reference;
mod ring;

pub use reference::ReferenceEngine;
pub use ring::{DeliveryRing, InFlight};

use crate::error::{Error, Result};
use crate::netmodel::{validate_network, HardwareConstants, Network};
use crate::plasticity::{apply_weight_delta, StdpTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Standard,
    AbsoluteRefractory { remaining: u32 },
    RelativeRefractory { remaining: u32 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NeuronState {
    pub accumulator: i64,
    pub phase: Phase,
    /// Cycle at whose end the threshold was last exceeded.
    pub last_exceed_cycle: Option<u64>,
    pub pending_fire: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SynapseState {
    pub weight: i64,
    pub last_delivery_cycle: Option<u64>,
    pub delivered_this_cycle: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StimulusKind {
    /// Adds the network's input spike amount.
    InputSpike,
    /// Adds `value` through the injection ports.
    Injection,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StimulusEvent {
    pub cycle: u64,
    pub neuron: String,
    pub kind: StimulusKind,
    pub value: i64,
}

impl StimulusEvent {
    pub fn spike(cycle: u64, neuron: impl Into<String>) -> Self {
        Self {
            cycle,
            neuron: neuron.into(),
            kind: StimulusKind::InputSpike,
            value: 0,
        }
    }

    pub fn inject(cycle: u64, neuron: impl Into<String>, value: i64) -> Self {
        Self {
            cycle,
            neuron: neuron.into(),
            kind: StimulusKind::Injection,
            value,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Stimulus {
    pub events: Vec<StimulusEvent>,
}

impl Stimulus {
    pub fn new(mut events: Vec<StimulusEvent>) -> Self {
        events.sort_by_key(|e| e.cycle);
        Self { events }
    }
}

/// Resolved stimulus, indexed by neuron position and sorted by cycle.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Applied {
    pub cycle: u64,
    pub neuron: usize,
    pub charge: i64,
}

pub(crate) fn resolve_stimulus(
    stim: &Stimulus,
    net: &Network,
    hw: &HardwareConstants,
) -> Result<Vec<Applied>> {
    let mut out = Vec::with_capacity(stim.events.len());
    for e in &stim.events {
        let neuron = net.neuron_index(&e.neuron).ok_or_else(|| Error::Reference {
            name: e.neuron.clone(),
            context: format!("stimulus at cycle {}", e.cycle),
        })?;
        let charge = match e.kind {
            StimulusKind::InputSpike => net.input_spike_amount,
            StimulusKind::Injection => {
                if !net.neurons[neuron].injection_enabled {
                    return Err(Error::InvalidArgument(format!(
                        "injection into `{}` at cycle {}, which has injection disabled",
                        e.neuron, e.cycle
                    )));
                }
                let (lo, hi) = hw.injection_range().ok_or_else(|| {
                    Error::InvalidArgument("hardware has no injection ports".into())
                })?;
                if !(lo..=hi).contains(&e.value) {
                    return Err(Error::InvalidArgument(format!(
                        "injection value {} at cycle {} outside [{lo}, {hi}]",
                        e.value, e.cycle
                    )));
                }
                e.value
            }
        };
        out.push(Applied {
            cycle: e.cycle,
            neuron,
            charge,
        });
    }
    out.sort_by_key(|a| a.cycle);
    Ok(out)
}

/// What happened on one cycle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CycleReport {
    pub cycle: u64,
    /// Indices of neurons that fired at the start of the cycle, ascending.
    pub fired: Vec<usize>,
    /// Potential of every neuron at the end of the cycle, in declaration order.
    pub charges: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Trace {
    pub neurons: Vec<String>,
    pub cycles: Vec<CycleReport>,
}

impl Trace {
    pub fn new(neurons: Vec<String>) -> Self {
        Self {
            neurons,
            cycles: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.cycles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cycles.is_empty()
    }
}

/// One consumed delivery, for instrumentation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Delivery {
    pub synapse: usize,
    pub fire_cycle: u64,
    pub delivery_cycle: u64,
}

#[derive(Debug, Clone)]
struct Wiring {
    post: usize,
    delay: u32,
}

#[derive(Debug, Clone)]
pub struct Engine {
    net: Network,
    weight_bits: u32,
    table: StdpTable,
    stdp: bool,
    wiring: Vec<Wiring>,
    outgoing: Vec<Vec<usize>>,
    incoming: Vec<Vec<usize>>,
    neurons: Vec<NeuronState>,
    synapses: Vec<SynapseState>,
    ring: DeliveryRing,
    stimuli: Vec<Applied>,
    next_stimulus: usize,
    cycle: u64,
    last_deliveries: Vec<Delivery>,
}

impl Engine {
    /// Loads `net` onto hardware `hw`. Fails with the validation report if
    /// the network does not fit, or if the stimulus is malformed.
    pub fn new(net: &Network, hw: &HardwareConstants, stim: &Stimulus) -> Result<Self> {
        let report = validate_network(net, hw);
        if !report.ok() {
            return Err(Error::Validation(report));
        }
        let stimuli = resolve_stimulus(stim, net, hw)?;

        let mut outgoing = vec![Vec::new(); net.neurons.len()];
        let mut incoming = vec![Vec::new(); net.neurons.len()];
        let mut wiring = Vec::with_capacity(net.synapses.len());
        for (i, s) in net.synapses.iter().enumerate() {
            // validated above, so the lookups cannot fail
            let pre = net.neuron_index(&s.pre).expect("validated");
            let post = net.neuron_index(&s.post).expect("validated");
            outgoing[pre].push(i);
            incoming[post].push(i);
            wiring.push(Wiring {
                post,
                delay: s.delay as u32,
            });
        }

        Ok(Self {
            weight_bits: hw.weight_width_bits,
            table: StdpTable::new(hw.stdp_table.clone()),
            stdp: net.stdp_enabled && !hw.stdp_table.is_empty(),
            neurons: net
                .neurons
                .iter()
                .map(|n| NeuronState {
                    accumulator: n.standard_resting_potential,
                    phase: Phase::Standard,
                    last_exceed_cycle: None,
                    pending_fire: false,
                })
                .collect(),
            synapses: net
                .synapses
                .iter()
                .map(|s| SynapseState {
                    weight: s.weight,
                    last_delivery_cycle: None,
                    delivered_this_cycle: false,
                })
                .collect(),
            wiring,
            outgoing,
            incoming,
            ring: DeliveryRing::new(hw.delivery_slots()),
            stimuli,
            next_stimulus: 0,
            cycle: 0,
            last_deliveries: Vec::new(),
            net: net.clone(),
        })
    }

    /// The next cycle to run.
    pub fn cycle(&self) -> u64 {
        self.cycle
    }

    pub fn network(&self) -> &Network {
        &self.net
    }

    pub fn neuron_state(&self, index: usize) -> &NeuronState {
        &self.neurons[index]
    }

    pub fn neuron_states(&self) -> &[NeuronState] {
        &self.neurons
    }

    pub fn synapse_state(&self, index: usize) -> &SynapseState {
        &self.synapses[index]
    }

    pub fn weights(&self) -> Vec<i64> {
        self.synapses.iter().map(|s| s.weight).collect()
    }

    pub fn in_flight(&self) -> usize {
        self.ring.in_flight()
    }

    /// Deliveries consumed by the most recent [`Engine::step`].
    pub fn last_deliveries(&self) -> &[Delivery] {
        &self.last_deliveries
    }

    pub fn step(&mut self) -> CycleReport {
        let t = self.cycle;
        let fired = self.fire(t);
        self.leak();
        self.deliver(t);
        let charges = self.settle(t);
        self.cycle += 1;
        CycleReport {
            cycle: t,
            fired,
            charges,
        }
    }

    pub fn run(&mut self, cycles: u64) -> Trace {
        let mut trace = Trace::new(self.net.neurons.iter().map(|n| n.id.clone()).collect());
        trace.cycles.reserve(cycles as usize);
        for _ in 0..cycles {
            trace.cycles.push(self.step());
        }
        trace
    }

    /// Back to the cycle-0 state, keeping the loaded program and stimulus.
    pub fn reset(&mut self) {
        for (state, settings) in self.neurons.iter_mut().zip(&self.net.neurons) {
            *state = NeuronState {
                accumulator: settings.standard_resting_potential,
                phase: Phase::Standard,
                last_exceed_cycle: None,
                pending_fire: false,
            };
        }
        for (state, settings) in self.synapses.iter_mut().zip(&self.net.synapses) {
            *state = SynapseState {
                weight: settings.weight,
                last_delivery_cycle: None,
                delivered_this_cycle: false,
            };
        }
        self.ring.clear();
        self.next_stimulus = 0;
        self.cycle = 0;
        self.last_deliveries.clear();
    }

    /// Overwrites one synapse's initial weight and delay without
    /// revalidating. Callers keep both inside the hardware bounds; takes
    /// effect at the next [`Engine::reset`].
    pub(crate) fn reprogram_synapse(&mut self, synapse: usize, weight: i64, delay: u32) {
        assert!((delay as usize) < self.ring.len());
        self.net.synapses[synapse].weight = weight;
        self.net.synapses[synapse].delay = delay as i64;
        self.wiring[synapse].delay = delay;
    }

    fn fire(&mut self, t: u64) -> Vec<usize> {
        let mut fired = Vec::new();
        for (n, state) in self.neurons.iter_mut().enumerate() {
            if !state.pending_fire {
                continue;
            }
            state.pending_fire = false;
            fired.push(n);

            for &s in &self.outgoing[n] {
                self.ring.schedule(
                    t,
                    self.wiring[s].delay,
                    InFlight {
                        synapse: s,
                        fire_cycle: t,
                    },
                );
            }

            let settings = &self.net.neurons[n];
            let absolute = settings.absolute_refractory as u32;
            let relative = settings.relative_refractory as u32;
            state.accumulator = if relative > 0 {
                settings.refractory_resting_potential
            } else {
                settings.standard_resting_potential
            };
            state.phase = if absolute > 0 {
                Phase::AbsoluteRefractory {
                    remaining: absolute,
                }
            } else if relative > 0 {
                Phase::RelativeRefractory {
                    remaining: relative,
                }
            } else {
                Phase::Standard
            };
        }
        fired
    }

    fn leak(&mut self) {
        for (state, settings) in self.neurons.iter_mut().zip(&self.net.neurons) {
            let floor = match state.phase {
                Phase::Standard => settings.standard_resting_potential,
                Phase::RelativeRefractory { .. } => settings.refractory_resting_potential,
                Phase::AbsoluteRefractory { .. } => continue,
            };
            if state.accumulator > floor {
                state.accumulator = (state.accumulator - settings.leak).max(floor);
            }
        }
    }

    fn deliver(&mut self, t: u64) {
        self.last_deliveries.clear();
        let due = self.ring.take(t);
        for spike in &due {
            let s = spike.synapse;
            let post = self.wiring[s].post;
            let syn = &mut self.synapses[s];
            syn.delivered_this_cycle = true;
            syn.last_delivery_cycle = Some(t);
            let target = &mut self.neurons[post];
            if !matches!(target.phase, Phase::AbsoluteRefractory { .. }) {
                target.accumulator += syn.weight;
            }
            self.last_deliveries.push(Delivery {
                synapse: s,
                fire_cycle: spike.fire_cycle,
                delivery_cycle: t,
            });
        }
        self.ring.recycle(t, due);

        while let Some(a) = self.stimuli.get(self.next_stimulus) {
            if a.cycle > t {
                break;
            }
            self.next_stimulus += 1;
            if a.cycle < t {
                continue;
            }
            let target = &mut self.neurons[a.neuron];
            if !matches!(target.phase, Phase::AbsoluteRefractory { .. }) {
                target.accumulator += a.charge;
            }
        }
    }

    fn settle(&mut self, t: u64) -> Vec<i64> {
        let mut charges = Vec::with_capacity(self.neurons.len());
        for n in 0..self.neurons.len() {
            let settings = &self.net.neurons[n];
            let state = &mut self.neurons[n];
            charges.push(state.accumulator);

            if state.accumulator > settings.threshold {
                state.pending_fire = true;
                state.last_exceed_cycle = Some(t);
                if self.stdp {
                    for &s in &self.incoming[n] {
                        let syn = &mut self.synapses[s];
                        if let Some(x) = syn.last_delivery_cycle {
                            if let Some(delta) = self.table.potentiation(t, x) {
                                syn.weight = apply_weight_delta(syn.weight, delta, self.weight_bits);
                            }
                        }
                    }
                }
            } else if let (true, Some(x)) = (self.stdp, state.last_exceed_cycle) {
                for &s in &self.incoming[n] {
                    let syn = &mut self.synapses[s];
                    if syn.delivered_this_cycle {
                        if let Some(delta) = self.table.depression(t, x) {
                            syn.weight = apply_weight_delta(syn.weight, delta, self.weight_bits);
                        }
                    }
                }
            }

            let standard = settings.standard_resting_potential;
            match state.phase {
                Phase::Standard => {
                    state.accumulator = state.accumulator.max(standard);
                }
                Phase::RelativeRefractory { remaining } => {
                    state.accumulator = state.accumulator.max(settings.refractory_resting_potential);
                    if remaining > 1 {
                        state.phase = Phase::RelativeRefractory {
                            remaining: remaining - 1,
                        };
                    } else {
                        state.phase = Phase::Standard;
                        state.accumulator = state.accumulator.max(standard);
                    }
                }
                Phase::AbsoluteRefractory { remaining } => {
                    let relative = settings.relative_refractory as u32;
                    if remaining > 1 {
                        state.phase = Phase::AbsoluteRefractory {
                            remaining: remaining - 1,
                        };
                    } else if relative > 0 {
                        state.phase = Phase::RelativeRefractory {
                            remaining: relative,
                        };
                    } else {
                        state.phase = Phase::Standard;
                        state.accumulator = state.accumulator.max(standard);
                    }
                }
            }
        }
        for syn in &mut self.synapses {
            syn.delivered_this_cycle = false;
        }
        charges
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netmodel::{NeuronSettings, SynapseSettings};

    fn hw() -> HardwareConstants {
        HardwareConstants {
            accumulator_width_bits: 16,
            threshold_width_bits: 8,
            weight_width_bits: 4,
            max_synapse_delay: 7,
            max_leak: 3,
            max_absolute_refractory: 3,
            max_relative_refractory: 3,
            ports_per_neuron: 8,
            injection_port_count: 2,
            stdp_table: vec![],
        }
    }

    fn chain(delay: i64) -> Network {
        Network {
            neurons: vec![NeuronSettings::new("a"), NeuronSettings::new("b")],
            synapses: vec![SynapseSettings::new("a", "b", 3, delay)],
            ..Network::default()
        }
    }

    #[test]
    fn initial_state_is_resting() {
        let mut net = chain(0);
        net.neurons[1].standard_resting_potential = -2;
        let e = Engine::new(&net, &hw(), &Stimulus::default()).unwrap();
        assert_eq!(e.neuron_state(0).accumulator, 0);
        assert_eq!(e.neuron_state(1).accumulator, -2);
        assert!(e.neuron_states().iter().all(|s| s.phase == Phase::Standard));
        assert_eq!(e.in_flight(), 0);
        assert_eq!(e.cycle(), 0);
    }

    #[test]
    fn quiet_without_stimulus() {
        let mut e = Engine::new(&chain(1), &hw(), &Stimulus::default()).unwrap();
        assert!(e.run(20).cycles.iter().all(|r| r.fired.is_empty()));
    }

    #[test]
    fn zero_cycles_is_empty() {
        let mut e = Engine::new(&chain(1), &hw(), &Stimulus::default()).unwrap();
        assert!(e.run(0).is_empty());
    }

    #[test]
    fn rejects_invalid_network() {
        let err = Engine::new(&chain(8), &hw(), &Stimulus::default()).unwrap_err();
        match err {
            Error::Validation(r) => assert!(r.has_rule(crate::netmodel::RULE_DELAY)),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn delivery_arrives_after_delay() {
        let stim = Stimulus::new(vec![StimulusEvent::spike(0, "a")]);
        let mut e = Engine::new(&chain(2), &hw(), &stim).unwrap();
        let trace = e.run(5);
        assert_eq!(trace.cycles[1].fired, vec![0]);
        assert_eq!(trace.cycles[2].charges[1], 0);
        assert_eq!(trace.cycles[3].charges[1], 3);
    }

    #[test]
    fn injection_requires_enabled_ports() {
        let stim = Stimulus::new(vec![StimulusEvent::inject(0, "b", 1)]);
        assert!(Engine::new(&chain(0), &hw(), &stim).is_err());

        let mut net = chain(0);
        net.neurons[1].injection_enabled = true;
        let mut e = Engine::new(&net, &hw(), &stim).unwrap();
        assert_eq!(e.step().charges[1], 1);

        let out_of_range = Stimulus::new(vec![StimulusEvent::inject(0, "b", 2)]);
        assert!(Engine::new(&net, &hw(), &out_of_range).is_err());
    }

    #[test]
    fn unknown_stimulus_target() {
        let stim = Stimulus::new(vec![StimulusEvent::spike(0, "zzz")]);
        assert!(matches!(
            Engine::new(&chain(0), &hw(), &stim),
            Err(Error::Reference { .. })
        ));
    }

    #[test]
    fn below_floor_is_visible_for_one_cycle() {
        let mut net = chain(0);
        net.synapses[0].weight = -4;
        let stim = Stimulus::new(vec![StimulusEvent::spike(0, "a")]);
        let mut e = Engine::new(&net, &hw(), &stim).unwrap();
        let trace = e.run(3);
        assert_eq!(trace.cycles[1].charges[1], -4);
        assert_eq!(e.neuron_state(1).accumulator, 0);
        assert_eq!(trace.cycles[2].charges[1], 0);
    }

    #[test]
    fn absolute_refractory_discards_stimulus() {
        let mut net = chain(0);
        net.neurons[0].absolute_refractory = 2;
        let stim = Stimulus::new(vec![
            StimulusEvent::spike(0, "a"),
            StimulusEvent::spike(1, "a"),
            StimulusEvent::spike(2, "a"),
        ]);
        let mut e = Engine::new(&net, &hw(), &stim).unwrap();
        let trace = e.run(4);
        // fires at 1, ignores input at 1 and 2
        assert_eq!(trace.cycles[1].fired, vec![0]);
        assert_eq!(trace.cycles[1].charges[0], 0);
        assert_eq!(trace.cycles[2].charges[0], 0);
        assert!(trace.cycles[3].fired.is_empty());
    }

    #[test]
    fn stdp_disabled_keeps_weights() {
        let mut h = hw();
        h.stdp_table = vec![1, 2, -1];
        let mut net = chain(0);
        net.synapses[0].weight = 2;
        let stim = Stimulus::new((0..10).map(|c| StimulusEvent::spike(c, "a")).collect());
        let mut e = Engine::new(&net, &h, &stim).unwrap();
        e.run(12);
        assert_eq!(e.weights(), vec![2]);

        net.stdp_enabled = true;
        let mut e = Engine::new(&net, &h, &stim).unwrap();
        e.run(12);
        assert_ne!(e.weights(), vec![2]);
    }
}
