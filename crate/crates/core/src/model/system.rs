use log::warn;

use super::params::{ModelInputs, Parameters};
use super::sectors::{self, relative_crime};
use super::ModelError;
use crate::engine::{
    self, EngineError, FirstOrderKind, FirstOrderState, Record, RunResult, SimConfig, System,
};

/// Order of the levels in the flat state vector.
pub const STATE_NAMES: [&str; 9] = [
    "lal_pop",
    "vul_pop",
    "resources",
    "insurances",
    "school_funds_status",
    "realized_gap_delay",
    "insured_frac_delay",
    "crime_perception_smooth",
    "vul_immigration_smooth",
];

/// Complete integrable state: five stocks and four first-order levels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelState {
    pub lal_pop: f64,
    pub vul_pop: f64,
    pub resources: f64,
    pub insurances: f64,
    pub school_funds_status: f64,
    pub realized_gap_delay: FirstOrderState,
    pub insured_frac_delay: FirstOrderState,
    pub crime_perception_smooth: FirstOrderState,
    pub vul_immigration_smooth: FirstOrderState,
}

impl ModelState {
    /// Initial state at `start_time`. Smooths start at their input values.
    pub fn initial(inputs: &ModelInputs, start_time: f64) -> Result<Self, ModelError> {
        let p = &inputs.parameters;
        let s = &inputs.switches;
        let vul = p.initial_percent_vul * p.initial_county_pop;
        let lal = p.initial_county_pop * (1.0 - p.initial_percent_vul);
        let perception0 = relative_crime(lal, vul, start_time, p);
        let vul_in0 = sectors::lal_outmigration(perception0, p, s)
            * p.relative_vul_immigration
            * super::params::factor(s.immigration);
        Ok(Self {
            lal_pop: lal,
            vul_pop: vul,
            resources: p.initial_resources,
            insurances: p.initial_insurances,
            school_funds_status: p.initial_school_funds_status,
            realized_gap_delay: FirstOrderState::new(
                FirstOrderKind::MaterialDelay,
                p.initial_realized_gap,
                p.time_to_realize_gap,
            )?,
            insured_frac_delay: FirstOrderState::new(
                FirstOrderKind::MaterialDelay,
                p.initial_insured_frac,
                p.time_to_implement_policies,
            )?,
            crime_perception_smooth: FirstOrderState::new(
                FirstOrderKind::InformationSmooth,
                perception0,
                p.crime_info_delay,
            )?,
            vul_immigration_smooth: FirstOrderState::new(
                FirstOrderKind::InformationSmooth,
                vul_in0,
                p.vul_migration_time_delay,
            )?,
        })
    }

    pub fn to_levels(&self) -> [f64; 9] {
        [
            self.lal_pop,
            self.vul_pop,
            self.resources,
            self.insurances,
            self.school_funds_status,
            self.realized_gap_delay.level(),
            self.insured_frac_delay.level(),
            self.crime_perception_smooth.level(),
            self.vul_immigration_smooth.level(),
        ]
    }

    pub fn from_levels(levels: &[f64], p: &Parameters) -> Result<Self, EngineError> {
        if levels.len() != STATE_NAMES.len() {
            return Err(EngineError::LengthMismatch {
                stocks: levels.len(),
                flows: STATE_NAMES.len(),
            });
        }
        use FirstOrderKind::*;
        Ok(Self {
            lal_pop: levels[0],
            vul_pop: levels[1],
            resources: levels[2],
            insurances: levels[3],
            school_funds_status: levels[4],
            realized_gap_delay: FirstOrderState::from_level(
                MaterialDelay,
                levels[5],
                p.time_to_realize_gap,
            )?,
            insured_frac_delay: FirstOrderState::from_level(
                MaterialDelay,
                levels[6],
                p.time_to_implement_policies,
            )?,
            crime_perception_smooth: FirstOrderState::from_level(
                InformationSmooth,
                levels[7],
                p.crime_info_delay,
            )?,
            vul_immigration_smooth: FirstOrderState::from_level(
                InformationSmooth,
                levels[8],
                p.vul_migration_time_delay,
            )?,
        })
    }

    pub fn total_pop(&self) -> f64 {
        self.lal_pop + self.vul_pop
    }
}

/// The three-sector preterm birth model bound to one set of inputs.
#[derive(Debug, Clone)]
pub struct PretermModel {
    inputs: ModelInputs,
}

impl PretermModel {
    pub fn new(inputs: ModelInputs) -> Result<Self, ModelError> {
        inputs.parameters.validate()?;
        Ok(Self { inputs })
    }

    pub fn inputs(&self) -> &ModelInputs {
        &self.inputs
    }

    pub fn parameters(&self) -> &Parameters {
        &self.inputs.parameters
    }

    pub fn initial_state(&self, start_time: f64) -> Result<ModelState, ModelError> {
        ModelState::initial(&self.inputs, start_time)
    }

    /// Evaluates every auxiliary at `(state, t)` and returns the level rates
    /// in [`STATE_NAMES`] order.
    pub fn evaluate(
        &self,
        state: &ModelState,
        t: f64,
        rec: &mut Record,
    ) -> Result<[f64; 9], ModelError> {
        let p = &self.inputs.parameters;
        let s = &self.inputs.switches;
        let lal = state.lal_pop;
        let vul = state.vul_pop;

        let shock = sectors::financial_shock(t, p);
        let crime = sectors::crime_block(
            lal,
            vul,
            t,
            &state.crime_perception_smooth,
            &state.vul_immigration_smooth,
            p,
            s,
        );
        let income = sectors::financial_resources(lal, vul, shock, p);
        let realized_gap = state.realized_gap_delay.output();
        let alloc = sectors::resource_allocation(state.resources, realized_gap, p);
        let ins = sectors::insurance_dynamics(
            vul,
            alloc.healthcare,
            state.insurances,
            &state.insured_frac_delay,
            p,
        );
        let school =
            sectors::school_funding(lal, vul, alloc.schools, state.school_funds_status, p, s);
        let pop = sectors::population_flows(
            lal,
            vul,
            school.upward_mobility,
            crime.frac_lal_out,
            crime.frac_vul_in,
            shock,
            p,
        );
        // insured_frac is a delay output, so PBR depends only on state
        let pt = sectors::preterm_block(pop.birth_lal, pop.vul_births, ins.insured_frac, p, s)?;
        let gap = pt.pbr - p.desired_pbr;

        let rates = [
            pop.lal_rate,
            pop.vul_rate,
            income - allocated_outflows(&alloc),
            ins.changes_in_insurances,
            school.adequacy,
            state.realized_gap_delay.level_rate(gap),
            state.insured_frac_delay.level_rate(ins.delay_input),
            state
                .crime_perception_smooth
                .level_rate(crime.relative_crime),
            state
                .vul_immigration_smooth
                .level_rate(crime.vul_immigration_input),
        ];

        rec.set("lal_pop", lal);
        rec.set("vul_pop", vul);
        rec.set("total_pop", lal + vul);
        rec.set("resources", state.resources);
        rec.set("insurances", state.insurances);
        rec.set("school_funds_status", state.school_funds_status);
        rec.set("pbr", pt.pbr);
        rec.set("desired_pbr", p.desired_pbr);
        rec.set("gap", gap);
        rec.set("realized_gap", realized_gap);
        rec.set("vor", pt.vor);
        rec.set("insured_frac", ins.insured_frac);
        rec.set("insured_ratio", ins.delay_input);
        rec.set("total_births", pt.total_births);
        rec.set("preterm_births", pt.preterm_births);
        rec.set("lal_preterm_births", pt.lal_preterm_births);
        rec.set("vul_preterm_births", pt.vul_preterm_births);
        rec.set("birth_lal", pop.birth_lal);
        rec.set("vul_births", pop.vul_births);
        rec.set("lal_deaths", pop.lal_deaths);
        rec.set("vul_deaths", pop.vul_deaths);
        rec.set("transition_to_vul", pop.transition_to_vul);
        rec.set("net_transition_to_low", pop.net_transition_to_low);
        rec.set("net_lal_flow", pop.net_lal_flow);
        rec.set("net_vul_flow", pop.net_vul_flow);
        rec.set("net_migration", crime.net_migration);
        rec.set("financial_shock", shock);
        rec.set("financial_resources", income);
        rec.set("pct_medicaid", alloc.pct_medicaid);
        rec.set("resources_to_healthcare", alloc.healthcare);
        rec.set("resources_on_schools", alloc.schools);
        rec.set("resources_other", alloc.other);
        rec.set("desired_medical_resources", ins.desired_medical_resources);
        rec.set("adequacy_insurances", ins.adequacy);
        rec.set("changes_in_insurances", ins.changes_in_insurances);
        rec.set(
            "school_age_children",
            school.lal_school_age + school.vul_school_age,
        );
        rec.set("school_funds_available", school.available);
        rec.set("desired_school_funds", school.desired);
        rec.set("adequacy_school_funds", school.adequacy);
        rec.set("school_gate", school.gate);
        rec.set("vul_frac", school.vul_frac);
        rec.set("transition_fraction", school.transition_fraction);
        rec.set("upward_mobility", school.upward_mobility);
        rec.set("crime_rate_community", crime.community_rate);
        rec.set("national_crime_rate", crime.national_rate);
        rec.set("relative_crime", crime.relative_crime);
        rec.set("perception_of_crime", crime.perception);
        rec.set("frac_lal_outmigration", crime.frac_lal_out);
        rec.set("frac_vul_immigration", crime.frac_vul_in);

        Ok(rates)
    }

    /// One explicit Euler step of size `dt`.
    pub fn step(
        &self,
        state: &ModelState,
        t: f64,
        dt: f64,
    ) -> Result<(ModelState, Record), ModelError> {
        let mut rec = Record::default();
        let rates = self.evaluate(state, t, &mut rec)?;
        let next = engine::euler_step(&state.to_levels(), &rates, dt)?;
        Ok((ModelState::from_levels(&next, self.parameters())?, rec))
    }

    /// Runs the model over `config` from its initial state, logging a
    /// warning for any stock that goes negative.
    pub fn simulate(&self, config: &SimConfig) -> Result<RunResult, ModelError> {
        let result = self.trajectory(config)?;
        warn_on_negative_stocks(&result);
        Ok(result)
    }

    /// [`simulate`](Self::simulate) without the run log.
    pub fn trajectory(&self, config: &SimConfig) -> Result<RunResult, ModelError> {
        let init = self.initial_state(config.start_time)?;
        Ok(engine::run(self, config, &init.to_levels())?)
    }
}

fn allocated_outflows(a: &sectors::Allocation) -> f64 {
    a.other + a.healthcare + a.schools
}

fn warn_on_negative_stocks(result: &RunResult) {
    for name in ["resources", "insurances", "lal_pop", "vul_pop"] {
        let Some(series) = result.series(name) else {
            continue;
        };
        if let Some((t, v)) = series.into_iter().find(|&(_, v)| v < 0.0) {
            warn!(target: "pbr_sim::model", "stock `{name}` negative from t = {t} (value {v})");
        }
    }
}

impl System for PretermModel {
    fn state_names(&self) -> &[&'static str] {
        &STATE_NAMES
    }

    fn evaluate(
        &self,
        t: f64,
        levels: &[f64],
        rates: &mut [f64],
        rec: &mut Record,
    ) -> Result<(), EngineError> {
        let state = ModelState::from_levels(levels, self.parameters())?;
        let r = PretermModel::evaluate(self, &state, t, rec).map_err(|e| match e {
            ModelError::Engine(e) => e,
            ModelError::ZeroBirths => EngineError::NonFinite {
                time: t,
                variable: "pbr".into(),
            },
            other => EngineError::InvalidConfig(other.to_string()),
        })?;
        rates.copy_from_slice(&r);
        Ok(())
    }
}
