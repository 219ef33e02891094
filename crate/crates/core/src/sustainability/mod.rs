//! Energy, cost, water and carbon accounting for one epoch.
//!
//! Units: energy in kWh, water in L, carbon in kg CO2, money in $.

pub(crate) mod evaluate;

pub use evaluate::{
    evaluate_plan, evaluate_routed, route_plan, BreakdownRow, CarryState, DcBreakdown, DcState, EpochEvaluation, PreparedEpoch,
    PreparedRequest, BREAKDOWN_CSV_HEADER,
};

use serde::{Deserialize, Serialize};

use crate::infrastructure::{Constants, Datacenter, Infrastructure, Node, PowerState, PowerStateRatios};

/// Cooling energy is three times the CRAC draw.
pub const COOLING_FACTOR: f64 = 3.0;
/// Support infrastructure draws 13% of IT energy.
pub const SUPPORT_FRACTION: f64 = 0.13;
pub const MJ_PER_KWH: f64 = 3.6;

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub it: f64,
    pub crac: f64,
    pub cooling: f64,
    pub support: f64,
    pub total: f64,
}

impl EnergyBreakdown {
    pub fn from_it(it: f64, cop: f64) -> Self {
        let crac = it / cop;
        let cooling = COOLING_FACTOR * crac;
        let support = SUPPORT_FRACTION * it;
        Self {
            it,
            crac,
            cooling,
            support,
            total: it + cooling + support,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct WaterBreakdown {
    pub evaporative: f64,
    pub blowdown: f64,
    pub grid: f64,
    pub total: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct CarbonBreakdown {
    pub grid: f64,
    pub water_related: f64,
    pub total: f64,
}

/// The four minimized objectives of one plan over one epoch.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveVector {
    /// Seconds; mean (or p95) TTFT over the epoch's requests, 0 when empty.
    pub ttft: f64,
    pub carbon: f64,
    pub water: f64,
    pub cost: f64,
}

impl ObjectiveVector {
    pub const NAMES: [&'static str; 4] = ["ttft", "carbon", "water", "cost"];

    pub fn new(ttft: f64, carbon: f64, water: f64, cost: f64) -> Self {
        Self { ttft, carbon, water, cost }
    }

    pub fn from_array(v: [f64; 4]) -> Self {
        Self::new(v[0], v[1], v[2], v[3])
    }

    pub fn to_array(&self) -> [f64; 4] {
        [self.ttft, self.carbon, self.water, self.cost]
    }

    pub fn get(&self, k: usize) -> f64 {
        self.to_array()[k]
    }

    /// `self` is no worse everywhere and strictly better somewhere.
    pub fn dominates(&self, other: &Self) -> bool {
        let (a, b) = (self.to_array(), other.to_array());
        a.iter().zip(&b).all(|(x, y)| x <= y) && a.iter().zip(&b).any(|(x, y)| x < y)
    }

    pub fn is_valid(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite() && *v >= 0.0)
    }
}

pub fn node_energy(state: PowerState, tdp: f64, ratios: &PowerStateRatios, epoch_length_s: f64) -> f64 {
    ratios.ratio(state) * tdp * epoch_length_s / 3.6e6
}

pub fn dc_energy(nodes: &[Node], dc: &Datacenter, infra: &Infrastructure) -> EnergyBreakdown {
    let it = nodes
        .iter()
        .map(|n| {
            node_energy(
                n.power_state,
                infra.node_types[usize::from(n.type_idx)].tdp,
                &infra.ratios,
                infra.epoch_length_s,
            )
        })
        .sum();
    EnergyBreakdown::from_it(it, dc.cop)
}

pub fn energy_cost(breakdowns: &[EnergyBreakdown], dcs: &[Datacenter], epoch: usize) -> f64 {
    breakdowns.iter().zip(dcs).map(|(e, dc)| e.total * dc.tou_at(epoch)).sum()
}

pub fn dc_water(energy: &EnergyBreakdown, dc: &Datacenter, epoch: usize, constants: &Constants) -> WaterBreakdown {
    let evaporative = energy.it * MJ_PER_KWH / constants.h_water;
    let blowdown = evaporative / (1.0 - dc.blowdown_ratio);
    let grid = energy.total * dc.wi_at(epoch);
    WaterBreakdown {
        evaporative,
        blowdown,
        grid,
        total: evaporative + blowdown + grid,
    }
}

/// With `literal` the evaporative and blowdown streams are charged at the
/// potable-water intensity and grid water at the wastewater intensity.
/// Otherwise all cooling-tower make-up water is potable and the blowdown is
/// additionally charged for wastewater treatment.
pub fn dc_carbon(
    energy: &EnergyBreakdown,
    water: &WaterBreakdown,
    dc: &Datacenter,
    epoch: usize,
    literal: bool,
) -> CarbonBreakdown {
    let ci = dc.ci_at(epoch);
    let grid = ci * energy.total;
    let treatment = if literal {
        (water.blowdown + water.evaporative) * dc.ei_potable + water.grid * dc.ei_waste
    } else {
        (water.blowdown + water.evaporative) * dc.ei_potable + water.blowdown * dc.ei_waste
    };
    let water_related = treatment * ci;
    CarbonBreakdown {
        grid,
        water_related,
        total: grid + water_related,
    }
}
