//! Traffic-pattern scenarios over a blue/grey/red node partition.
//!
//! Block definitions (row = source, column = destination):
//!
//! | scenario            | active cells                                      |
//! |---------------------|---------------------------------------------------|
//! | isolated_links      | (2k, 2k+1) and (2k+1, 2k) for consecutive pairs   |
//! | single_links        | chain i -> i+1 over all nodes                     |
//! | internal_supernode  | hub <-> every other blue node                     |
//! | external_supernode  | hub <-> every grey and red node                   |
//! | attack_planning     | red x red, off-diagonal                           |
//! | attack_staging      | red x grey                                        |
//! | attack_infiltration | grey x blue                                       |
//! | attack_lateral      | chain through the blue nodes                      |
//! | security            | blue x blue, off-diagonal                         |
//! | defense             | blue x grey and grey x blue                       |
//! | deterrence          | red diagonal                                      |
//! | ddos_c2             | C2 x C2, off-diagonal                             |
//! | ddos_botnet         | C2 x client, identical rows                       |
//! | ddos_attack         | client x blue                                     |
//! | ddos_backscatter    | transpose of ddos_attack                          |
//!
//! C2 nodes are the first `c2_count` red nodes; the remaining red nodes are
//! botnet clients.

use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::matrix::{ColorMatrix, TrafficMatrix};
use crate::nodes::{Partition, Space};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    IsolatedLinks,
    SingleLinks,
    InternalSupernode,
    ExternalSupernode,
    AttackPlanning,
    AttackStaging,
    AttackInfiltration,
    AttackLateral,
    Security,
    Defense,
    Deterrence,
    DdosC2,
    DdosBotnet,
    DdosAttack,
    DdosBackscatter,
}

/// Which sample group a scenario belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScenarioFamily {
    TrafficTopologies,
    NotionalAttack,
    SecurityDefenseDeterrence,
    Ddos,
}

impl Scenario {
    pub const ALL: [Scenario; 15] = [
        Scenario::IsolatedLinks,
        Scenario::SingleLinks,
        Scenario::InternalSupernode,
        Scenario::ExternalSupernode,
        Scenario::AttackPlanning,
        Scenario::AttackStaging,
        Scenario::AttackInfiltration,
        Scenario::AttackLateral,
        Scenario::Security,
        Scenario::Defense,
        Scenario::Deterrence,
        Scenario::DdosC2,
        Scenario::DdosBotnet,
        Scenario::DdosAttack,
        Scenario::DdosBackscatter,
    ];

    pub fn slug(self) -> &'static str {
        match self {
            Scenario::IsolatedLinks => "isolated-links",
            Scenario::SingleLinks => "single-links",
            Scenario::InternalSupernode => "internal-supernode",
            Scenario::ExternalSupernode => "external-supernode",
            Scenario::AttackPlanning => "attack-planning",
            Scenario::AttackStaging => "attack-staging",
            Scenario::AttackInfiltration => "attack-infiltration",
            Scenario::AttackLateral => "attack-lateral",
            Scenario::Security => "security",
            Scenario::Defense => "defense",
            Scenario::Deterrence => "deterrence",
            Scenario::DdosC2 => "ddos-c2",
            Scenario::DdosBotnet => "ddos-botnet",
            Scenario::DdosAttack => "ddos-attack",
            Scenario::DdosBackscatter => "ddos-backscatter",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            Scenario::IsolatedLinks => "Isolated Links",
            Scenario::SingleLinks => "Single Links",
            Scenario::InternalSupernode => "Internal Supernode",
            Scenario::ExternalSupernode => "External Supernode",
            Scenario::AttackPlanning => "Attack Planning",
            Scenario::AttackStaging => "Attack Staging",
            Scenario::AttackInfiltration => "Attack Infiltration",
            Scenario::AttackLateral => "Lateral Movement",
            Scenario::Security => "Security",
            Scenario::Defense => "Defense",
            Scenario::Deterrence => "Deterrence",
            Scenario::DdosC2 => "Command and Control (C2)",
            Scenario::DdosBotnet => "Botnet Clients",
            Scenario::DdosAttack => "DDoS Attack",
            Scenario::DdosBackscatter => "Backscatter",
        }
    }

    pub fn family(self) -> ScenarioFamily {
        use Scenario::*;
        match self {
            IsolatedLinks | SingleLinks | InternalSupernode | ExternalSupernode => {
                ScenarioFamily::TrafficTopologies
            }
            AttackPlanning | AttackStaging | AttackInfiltration | AttackLateral => {
                ScenarioFamily::NotionalAttack
            }
            Security | Defense | Deterrence => ScenarioFamily::SecurityDefenseDeterrence,
            DdosC2 | DdosBotnet | DdosAttack | DdosBackscatter => ScenarioFamily::Ddos,
        }
    }

    pub fn from_slug(s: &str) -> Option<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.slug() == s || k.slug().replace('-', "_") == s)
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.slug())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub scenario: Scenario,
    pub partition: Partition,
    /// Packets per active cell.
    pub intensity: u64,
    /// Supernode hub; defaults to the first blue node.
    #[serde(default)]
    pub hub: Option<usize>,
    /// Number of red nodes acting as C2 servers.
    #[serde(default = "default_c2")]
    pub c2_count: usize,
}

fn default_c2() -> usize {
    2
}

impl ScenarioSpec {
    pub fn new(scenario: Scenario, n: usize) -> Self {
        ScenarioSpec {
            scenario,
            partition: Partition::default_for(n),
            intensity: 1,
            hub: None,
            c2_count: default_c2(),
        }
    }

    pub fn n(&self) -> usize {
        self.partition.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ScenarioError {
    #[error("{scenario} needs at least {min} {space:?} node(s), partition has {have}")]
    SpaceTooSmall {
        scenario: Scenario,
        space: Space,
        min: usize,
        have: usize,
    },
    #[error("{scenario} needs at least {min} nodes")]
    TooFewNodes { scenario: Scenario, min: usize },
    #[error("hub {hub} is out of range for {n} nodes")]
    HubOutOfRange { hub: usize, n: usize },
    #[error("{scenario} needs {need} C2 node(s) and {clients} client(s); red space has {red}")]
    BotnetShape {
        scenario: Scenario,
        need: usize,
        clients: usize,
        red: usize,
    },
    #[error("intensity must be at least 1")]
    ZeroIntensity,
}

/// Directed cells activated by a scenario.
pub fn scenario_cells(spec: &ScenarioSpec) -> Result<Vec<(usize, usize)>, ScenarioError> {
    use Scenario::*;
    let p = &spec.partition;
    let n = p.len();
    let sc = spec.scenario;
    if spec.intensity == 0 {
        return Err(ScenarioError::ZeroIntensity);
    }
    let blue = p.nodes(Space::Blue);
    let grey = p.nodes(Space::Grey);
    let red = p.nodes(Space::Red);
    let require = |space: Space, nodes: &Vec<usize>, min: usize| {
        if nodes.len() < min {
            Err(ScenarioError::SpaceTooSmall {
                scenario: sc,
                space,
                min,
                have: nodes.len(),
            })
        } else {
            Ok(())
        }
    };
    let block = |src: &[usize], dst: &[usize]| -> Vec<(usize, usize)> {
        let mut v = Vec::new();
        for &s in src {
            v.extend(dst.iter().filter(|&&d| d != s).map(|&d| (s, d)));
        }
        v
    };
    let chain = |nodes: &[usize]| -> Vec<(usize, usize)> {
        nodes.windows(2).map(|w| (w[0], w[1])).collect()
    };
    let botnet = |need_c2: usize, need_clients: usize| {
        let c2 = spec.c2_count.min(red.len());
        if spec.c2_count < need_c2 || red.len() < spec.c2_count + need_clients {
            return Err(ScenarioError::BotnetShape {
                scenario: sc,
                need: need_c2.max(spec.c2_count),
                clients: need_clients,
                red: red.len(),
            });
        }
        Ok((red[..c2].to_vec(), red[c2..].to_vec()))
    };
    let hub = |space_nodes: &Vec<usize>| -> Result<usize, ScenarioError> {
        match spec.hub {
            Some(h) if h >= n => Err(ScenarioError::HubOutOfRange { hub: h, n }),
            Some(h) => Ok(h),
            None => Ok(space_nodes[0]),
        }
    };

    let cells = match sc {
        IsolatedLinks => {
            if n < 2 {
                return Err(ScenarioError::TooFewNodes { scenario: sc, min: 2 });
            }
            (0..n / 2)
                .flat_map(|k| [(2 * k, 2 * k + 1), (2 * k + 1, 2 * k)])
                .collect()
        }
        SingleLinks => {
            if n < 3 {
                return Err(ScenarioError::TooFewNodes { scenario: sc, min: 3 });
            }
            let all: Vec<usize> = (0..n).collect();
            chain(&all)
        }
        InternalSupernode => {
            require(Space::Blue, &blue, 2)?;
            let h = hub(&blue)?;
            let peers: Vec<usize> = blue.iter().copied().filter(|&b| b != h).collect();
            let mut v = block(&[h], &peers);
            v.extend(block(&peers, &[h]));
            v
        }
        ExternalSupernode => {
            require(Space::Blue, &blue, 1)?;
            let h = hub(&blue)?;
            let outside: Vec<usize> = (0..n)
                .filter(|&i| i != h && p.space(i) != p.space(h))
                .collect();
            if outside.is_empty() {
                return Err(ScenarioError::SpaceTooSmall {
                    scenario: sc,
                    space: Space::Grey,
                    min: 1,
                    have: 0,
                });
            }
            let mut v = block(&[h], &outside);
            v.extend(block(&outside, &[h]));
            v
        }
        AttackPlanning => {
            require(Space::Red, &red, 2)?;
            block(&red, &red)
        }
        AttackStaging => {
            require(Space::Red, &red, 1)?;
            require(Space::Grey, &grey, 1)?;
            block(&red, &grey)
        }
        AttackInfiltration => {
            require(Space::Grey, &grey, 1)?;
            require(Space::Blue, &blue, 1)?;
            block(&grey, &blue)
        }
        AttackLateral => {
            require(Space::Blue, &blue, 2)?;
            chain(&blue)
        }
        Security => {
            require(Space::Blue, &blue, 2)?;
            block(&blue, &blue)
        }
        Defense => {
            require(Space::Blue, &blue, 1)?;
            require(Space::Grey, &grey, 1)?;
            let mut v = block(&blue, &grey);
            v.extend(block(&grey, &blue));
            v
        }
        Deterrence => {
            require(Space::Red, &red, 1)?;
            red.iter().map(|&r| (r, r)).collect()
        }
        DdosC2 => {
            let (c2, _) = botnet(2, 0)?;
            block(&c2, &c2)
        }
        DdosBotnet => {
            let (c2, clients) = botnet(1, 1)?;
            block(&c2, &clients)
        }
        DdosAttack | DdosBackscatter => {
            require(Space::Blue, &blue, 1)?;
            let (_, clients) = botnet(0, 1)?;
            let attack = block(&clients, &blue);
            if sc == DdosAttack {
                attack
            } else {
                attack.into_iter().map(|(s, d)| (d, s)).collect()
            }
        }
    };
    Ok(cells)
}

/// Traffic plus the partition-derived coloring.
pub fn gen_scenario(spec: &ScenarioSpec) -> Result<(TrafficMatrix, ColorMatrix), ScenarioError> {
    let mut m = TrafficMatrix::zeros(spec.n());
    for (i, j) in scenario_cells(spec)? {
        m.set(i, j, spec.intensity);
    }
    Ok((m, spec.partition.color_matrix()))
}
