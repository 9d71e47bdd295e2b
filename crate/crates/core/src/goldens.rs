// SPDX-License-Identifier: Apache-2.0

//! Golden-trace regression cases.
//!
//! Each case is a directory holding `case.json`, the hardware and network
//! files, a stimulus file and the expected trace as JSON lines. The expected
//! traces are the published activity tables, copied cell for cell. The
//! networks were reconstructed from the prose descriptions and checked
//! against those tables; [`search_reconstruction`] re-derives them.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::engine::{Engine, ReferenceEngine, Stimulus, Trace};
use crate::error::{Error, Result};
use crate::ioformats::{load_hardware, load_network, load_stimulus, parse_trace_jsonl};
use crate::netmodel::{HardwareConstants, Network};

/// Ranges scanned when re-deriving a case's synapse parameters.
#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchSpace {
    pub weight_min: i64,
    pub weight_max: i64,
    pub delay_min: u32,
    pub delay_max: u32,
    /// Synapses, written `pre->post`, whose delay is stated outright in the
    /// network's description and so is held at the fixture value.
    #[serde(default)]
    pub fixed_delays: Vec<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CaseFile {
    format: i64,
    name: String,
    cycles: u64,
    notes: String,
    hardware: String,
    network: String,
    stimulus: String,
    expected: String,
    search: SearchSpace,
}

#[derive(Debug, Clone)]
pub struct GoldenCase {
    pub name: String,
    /// How the network was reconstructed.
    pub notes: String,
    pub cycles: u64,
    pub hardware: HardwareConstants,
    pub network: Network,
    pub stimulus: Stimulus,
    pub expected: Trace,
    pub search: SearchSpace,
}

/// Raw file contents of one case.
pub struct CaseSources<'a> {
    pub case: &'a str,
    pub hardware: &'a str,
    pub network: &'a str,
    pub stimulus: &'a str,
    pub expected: &'a str,
}

fn in_case(name: &str, e: Error) -> Error {
    match e {
        Error::Parse {
            line,
            column,
            message,
        } => Error::Parse {
            line,
            column,
            message: format!("case {name}: {message}"),
        },
        other => other,
    }
}

impl GoldenCase {
    pub fn from_sources(src: &CaseSources<'_>) -> Result<Self> {
        let file: CaseFile = serde_json::from_str(src.case)
            .map_err(|e| Error::parse_at(e.line(), e.column(), format!("case.json: {e}")))?;
        if file.format != crate::ioformats::FORMAT_VERSION {
            return Err(Error::parse(format!(
                "case {}: unsupported format {}",
                file.name, file.format
            )));
        }
        let name = file.name.clone();
        let hardware = load_hardware(src.hardware).map_err(|e| in_case(&name, e))?;
        let network = load_network(src.network, &hardware).map_err(|e| in_case(&name, e))?;
        let stimulus = load_stimulus(src.stimulus, &network).map_err(|e| in_case(&name, e))?;
        let expected = parse_trace_jsonl(src.expected).map_err(|e| in_case(&name, e))?;

        let declared: Vec<&str> = network.neurons.iter().map(|n| n.id.as_str()).collect();
        if expected.neurons != declared {
            return Err(Error::parse(format!(
                "case {name}: expected trace columns {:?} differ from network neurons {declared:?}",
                expected.neurons
            )));
        }
        if expected.len() as u64 != file.cycles {
            return Err(Error::parse(format!(
                "case {name}: {} expected rows for {} cycles",
                expected.len(),
                file.cycles
            )));
        }
        if file.search.delay_max > hardware.max_synapse_delay
            || file.search.weight_min > file.search.weight_max
            || file.search.delay_min > file.search.delay_max
        {
            return Err(Error::parse(format!("case {name}: bad search ranges")));
        }
        Ok(Self {
            name,
            notes: file.notes,
            cycles: file.cycles,
            hardware,
            network,
            stimulus,
            expected,
            search: file.search,
        })
    }

    /// Loads the case stored in `dir`.
    pub fn load(dir: &Path) -> Result<Self> {
        let case_text = read(&dir.join("case.json"))?;
        let file: CaseFile = serde_json::from_str(&case_text)
            .map_err(|e| Error::parse_at(e.line(), e.column(), format!("{}: {e}", dir.display())))?;
        let hardware = read(&dir.join(&file.hardware))?;
        let network = read(&dir.join(&file.network))?;
        let stimulus = read(&dir.join(&file.stimulus))?;
        let expected = read(&dir.join(&file.expected))?;
        Self::from_sources(&CaseSources {
            case: &case_text,
            hardware: &hardware,
            network: &network,
            stimulus: &stimulus,
            expected: &expected,
        })
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Loads every case directory under `root`, sorted by directory name.
pub fn load_cases(root: &Path) -> Result<Vec<GoldenCase>> {
    let entries = std::fs::read_dir(root).map_err(|source| Error::Io {
        path: root.display().to_string(),
        source,
    })?;
    let mut dirs: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.join("case.json").is_file())
        .collect();
    dirs.sort();
    dirs.iter().map(|d| GoldenCase::load(d)).collect()
}

macro_rules! embedded {
    ($($name:literal),* $(,)?) => {
        &[$(
            CaseSources {
                case: include_str!(concat!("../fixtures/v1/", $name, "/case.json")),
                hardware: include_str!(concat!("../fixtures/v1/", $name, "/hardware.json")),
                network: include_str!(concat!("../fixtures/v1/", $name, "/network.json")),
                stimulus: include_str!(concat!("../fixtures/v1/", $name, "/stimulus.txt")),
                expected: include_str!(concat!("../fixtures/v1/", $name, "/expected.jsonl")),
            },
        )*]
    };
}

static BUILTIN: &[CaseSources<'static>] = embedded![
    "network_1_basic",
    "network_2_every_timestep",
    "network_3_leak",
    "network_4_more_leak",
    "network_4_more",
    "network_5_abs_ref",
    "network_6_rel_ref",
    "network_7_stdp",
    "network_8_stdp",
    "network_9_stdp",
    "network_a_stdp",
    "network_c_flight",
];

/// The fixture set compiled into the library, in presentation order.
pub fn builtin_cases() -> Vec<GoldenCase> {
    BUILTIN
        .iter()
        .map(|src| GoldenCase::from_sources(src).expect("embedded fixture is valid"))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Simulator {
    /// [`Engine`], the ring-buffer implementation.
    Engine,
    /// [`ReferenceEngine`], the dense-scan oracle.
    Reference,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Field {
    Fired,
    Charge,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Divergence {
    pub cycle: u64,
    pub neuron: String,
    pub field: Field,
    pub expected: String,
    pub actual: String,
}

impl fmt::Display for Divergence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let field = match self.field {
            Field::Fired => "fired",
            Field::Charge => "charge",
        };
        write!(
            f,
            "cycle {}, neuron {}, {field}: expected {}, got {}",
            self.cycle, self.neuron, self.expected, self.actual
        )
    }
}

/// First cell where `actual` departs from `expected`, scanning cycles in
/// order and, within a cycle, fire flags before charges.
pub fn compare(expected: &Trace, actual: &Trace) -> Option<Divergence> {
    for (i, exp) in expected.cycles.iter().enumerate() {
        let Some(act) = actual.cycles.get(i) else {
            return Some(Divergence {
                cycle: exp.cycle,
                neuron: "-".into(),
                field: Field::Fired,
                expected: "a cycle".into(),
                actual: "end of trace".into(),
            });
        };
        for (n, name) in expected.neurons.iter().enumerate() {
            let e = exp.fired.contains(&n);
            let a = act.fired.contains(&n);
            if e != a {
                return Some(Divergence {
                    cycle: exp.cycle,
                    neuron: name.clone(),
                    field: Field::Fired,
                    expected: e.to_string(),
                    actual: a.to_string(),
                });
            }
        }
        for (n, name) in expected.neurons.iter().enumerate() {
            if exp.charges[n] != act.charges[n] {
                return Some(Divergence {
                    cycle: exp.cycle,
                    neuron: name.clone(),
                    field: Field::Charge,
                    expected: exp.charges[n].to_string(),
                    actual: act.charges[n].to_string(),
                });
            }
        }
    }
    None
}

#[derive(Debug, Clone)]
pub struct GoldenReport {
    pub name: String,
    pub cycles: u64,
    pub divergence: Option<Divergence>,
}

impl GoldenReport {
    pub fn passed(&self) -> bool {
        self.divergence.is_none()
    }
}

impl fmt::Display for GoldenReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.divergence {
            None => write!(f, "PASS {} ({} cycles)", self.name, self.cycles),
            Some(d) => write!(f, "FAIL {}: {d}", self.name),
        }
    }
}

pub fn simulate(case: &GoldenCase, simulator: Simulator) -> Result<Trace> {
    Ok(match simulator {
        Simulator::Engine => {
            Engine::new(&case.network, &case.hardware, &case.stimulus)?.run(case.cycles)
        }
        Simulator::Reference => {
            ReferenceEngine::new(&case.network, &case.hardware, &case.stimulus)?.run(case.cycles)
        }
    })
}

pub fn run_golden(case: &GoldenCase, simulator: Simulator) -> Result<GoldenReport> {
    let actual = simulate(case, simulator)?;
    Ok(GoldenReport {
        name: case.name.clone(),
        cycles: case.cycles,
        divergence: compare(&case.expected, &actual),
    })
}

/// Result of scanning a case's search space.
#[derive(Debug, Clone)]
pub struct SearchOutcome {
    /// Synapses whose parameters were varied: those whose pre-neuron fires
    /// somewhere in the expected trace. The rest cannot affect it.
    pub searched: Vec<usize>,
    pub candidates: u64,
    /// `(weight, delay)` per searched synapse for every assignment that
    /// reproduces the expected trace, in enumeration order.
    pub solutions: Vec<Vec<(i64, u32)>>,
    /// The fixture's own assignment.
    pub fixture: Vec<(i64, u32)>,
}

impl SearchOutcome {
    /// Exactly one assignment matches and it is the fixture's.
    pub fn unique(&self) -> bool {
        self.solutions.len() == 1 && self.solutions[0] == self.fixture
    }
}

/// Enumerates every weight/delay assignment of the exercised synapses within
/// `case.search`, keeping those that reproduce the expected trace exactly.
pub fn search_reconstruction(case: &GoldenCase) -> Result<SearchOutcome> {
    let fires: Vec<bool> = (0..case.network.neurons.len())
        .map(|n| case.expected.cycles.iter().any(|r| r.fired.contains(&n)))
        .collect();
    let searched: Vec<usize> = case
        .network
        .synapses
        .iter()
        .enumerate()
        .filter(|(_, s)| fires[case.network.neuron_index(&s.pre).expect("validated")])
        .map(|(i, _)| i)
        .collect();
    let fixture: Vec<(i64, u32)> = searched
        .iter()
        .map(|&i| {
            let s = &case.network.synapses[i];
            (s.weight, s.delay as u32)
        })
        .collect();

    let space = &case.search;
    let options: Vec<Vec<(i64, u32)>> = searched
        .iter()
        .map(|&i| {
            let s = &case.network.synapses[i];
            let delays = if space.fixed_delays.contains(&format!("{}->{}", s.pre, s.post)) {
                s.delay as u32..=s.delay as u32
            } else {
                space.delay_min..=space.delay_max
            };
            (space.weight_min..=space.weight_max)
                .flat_map(|w| delays.clone().map(move |d| (w, d)))
                .collect()
        })
        .collect();

    let mut engine = Engine::new(&case.network, &case.hardware, &case.stimulus)?;
    let mut odometer = vec![0usize; searched.len()];
    let mut solutions = Vec::new();
    let mut candidates = 0u64;

    loop {
        for (k, &choice) in odometer.iter().enumerate() {
            let (w, d) = options[k][choice];
            engine.reprogram_synapse(searched[k], w, d);
        }
        engine.reset();
        candidates += 1;

        let matches = case.expected.cycles.iter().all(|exp| {
            let got = engine.step();
            got.fired == exp.fired && got.charges == exp.charges
        });
        if matches {
            solutions.push(odometer.iter().enumerate().map(|(k, &c)| options[k][c]).collect());
        }

        // advance the odometer; done when it wraps
        let mut i = 0;
        loop {
            if i == odometer.len() {
                return Ok(SearchOutcome {
                    searched,
                    candidates,
                    solutions,
                    fixture,
                });
            }
            odometer[i] += 1;
            if odometer[i] < options[i].len() {
                break;
            }
            odometer[i] = 0;
            i += 1;
        }
    }
}
