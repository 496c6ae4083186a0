//! Per-sector algebra of the model. Each block is a pure function of the
//! current stocks, time and parameters; the integrator owns the state.

use super::params::{factor, Parameters, Switches};
use super::ModelError;
use crate::engine::{pulse, FirstOrderState};

/// Fraction of business activity lost to the financial shock (dimensionless).
pub fn financial_shock(t: f64, p: &Parameters) -> f64 {
    p.shock_magnitude * pulse(t, p.time_of_shock, p.shock_duration)
}

/// Tax income, dollars per year.
pub fn financial_resources(lal: f64, vul: f64, shock: f64, p: &Parameters) -> f64 {
    (vul * p.relative_contribution_vul + lal) * p.tax_contribution_lal * (1.0 - shock)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Allocation {
    /// Share of resources spent on Medicaid per year.
    pub pct_medicaid: f64,
    pub healthcare: f64,
    pub schools: f64,
    pub other: f64,
}

pub fn resource_allocation(resources: f64, realized_gap: f64, p: &Parameters) -> Allocation {
    let pct_medicaid = p.gap_pressure.eval(realized_gap);
    Allocation {
        pct_medicaid,
        healthcare: pct_medicaid * resources,
        schools: (1.0 - pct_medicaid - p.frac_resources_other) * resources,
        other: p.frac_resources_other * resources,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Insurance {
    pub desired_medical_resources: f64,
    pub adequacy: f64,
    /// people per year
    pub changes_in_insurances: f64,
    /// Clamped output of the coverage delay.
    pub insured_frac: f64,
    /// Input to feed the coverage delay this step. Equals the delay's own
    /// output when there is no vulnerable population, which freezes it.
    pub delay_input: f64,
}

pub fn insurance_dynamics(
    vul: f64,
    healthcare: f64,
    insurances: f64,
    coverage_delay: &FirstOrderState,
    p: &Parameters,
) -> Insurance {
    let desired = vul * p.avg_insurance_cost;
    let adequacy = healthcare * p.federal_match - desired;
    let delay_input = if vul > 0.0 {
        insurances / vul
    } else {
        coverage_delay.output()
    };
    Insurance {
        desired_medical_resources: desired,
        adequacy,
        changes_in_insurances: adequacy / p.avg_insurance_cost,
        insured_frac: coverage_delay.output().clamp(0.0, 1.0),
        delay_input,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchoolFunding {
    pub lal_school_age: f64,
    pub vul_school_age: f64,
    pub available: f64,
    pub desired: f64,
    /// people per year
    pub adequacy: f64,
    /// 1 when funds are in surplus, otherwise the deficit relative to LAL
    /// school-age children, floored at -1.
    pub gate: f64,
    pub vul_frac: f64,
    pub transition_fraction: f64,
    /// 1/yr
    pub upward_mobility: f64,
}

pub fn school_funding(
    lal: f64,
    vul: f64,
    schools: f64,
    status: f64,
    p: &Parameters,
    s: &Switches,
) -> SchoolFunding {
    let lal_school_age = p.school_age_percentage * lal;
    let vul_school_age = p.school_age_percentage * vul;
    let available = schools * p.local_government_match / p.avg_cost_schooling;
    let desired = (lal_school_age + vul_school_age) * p.desired_frac_school_funding;
    let gate = if status > 0.0 {
        1.0
    } else if lal_school_age > 0.0 {
        (status / lal_school_age).max(-1.0)
    } else if status < 0.0 {
        -1.0
    } else {
        0.0
    };
    let total = lal + vul;
    let vul_frac = if total > 0.0 { vul / total } else { 0.0 };
    let transition_fraction =
        p.school_age_percentage * gate * (p.desired_frac_school_funding - vul_frac);
    let upward_mobility =
        transition_fraction * p.family_size / p.time_for_education_impact * factor(s.education);
    SchoolFunding {
        lal_school_age,
        vul_school_age,
        available,
        desired,
        adequacy: available - desired,
        gate,
        vul_frac,
        transition_fraction,
        upward_mobility,
    }
}

/// Community violent crime rate, crimes per 100k per year.
pub fn community_crime_rate(lal: f64, vul: f64, p: &Parameters) -> f64 {
    (lal + vul * p.relative_crime_vul) * p.crime_rate_lal / (lal + vul) * 100_000.0
}

pub fn relative_crime(lal: f64, vul: f64, t: f64, p: &Parameters) -> f64 {
    community_crime_rate(lal, vul, p) / p.national_crime_rate.eval(t)
}

/// LAL out-migration fraction implied by a perceived relative crime level.
pub fn lal_outmigration(perception: f64, p: &Parameters, s: &Switches) -> f64 {
    p.crime_perception_immigration.eval(perception) * factor(s.outmigration)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Crime {
    pub community_rate: f64,
    pub national_rate: f64,
    pub relative_crime: f64,
    pub perception: f64,
    /// 1/yr, positive means LAL leave
    pub frac_lal_out: f64,
    /// 1/yr, smoothed Vul in-migration fraction
    pub frac_vul_in: f64,
    /// Input to the Vul in-migration smooth.
    pub vul_immigration_input: f64,
    /// people per year; diagnostic only
    pub net_migration: f64,
}

pub fn crime_block(
    lal: f64,
    vul: f64,
    t: f64,
    perception: &FirstOrderState,
    vul_immigration: &FirstOrderState,
    p: &Parameters,
    s: &Switches,
) -> Crime {
    let community_rate = community_crime_rate(lal, vul, p);
    let national_rate = p.national_crime_rate.eval(t);
    let perceived = perception.output();
    let frac_lal_out = lal_outmigration(perceived, p, s);
    let frac_vul_in = vul_immigration.output();
    Crime {
        community_rate,
        national_rate,
        relative_crime: community_rate / national_rate,
        perception: perceived,
        frac_lal_out,
        frac_vul_in,
        vul_immigration_input: frac_lal_out * p.relative_vul_immigration * factor(s.immigration),
        net_migration: -frac_lal_out * lal + frac_vul_in * vul,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PopulationFlows {
    pub birth_lal: f64,
    pub vul_births: f64,
    pub lal_deaths: f64,
    pub vul_deaths: f64,
    pub transition_to_vul: f64,
    pub net_transition_to_low: f64,
    /// LAL leaving the county, people per year.
    pub net_lal_flow: f64,
    /// Vul entering the county, people per year.
    pub net_vul_flow: f64,
    pub lal_rate: f64,
    pub vul_rate: f64,
}

pub fn population_flows(
    lal: f64,
    vul: f64,
    upward_mobility: f64,
    frac_lal_out: f64,
    frac_vul_in: f64,
    shock: f64,
    p: &Parameters,
) -> PopulationFlows {
    let birth_lal = p.frac_br_lal * lal;
    let vul_births = p.frac_br_vul * vul;
    let lal_deaths = p.frac_dr_lal * lal;
    let vul_deaths = p.frac_dr_vul * vul;
    let transition_to_vul = shock * p.frac_becoming_vulnerable * lal;
    let net_transition_to_low = upward_mobility * vul;
    let net_lal_flow = frac_lal_out * lal;
    let net_vul_flow = frac_vul_in * vul;
    PopulationFlows {
        birth_lal,
        vul_births,
        lal_deaths,
        vul_deaths,
        transition_to_vul,
        net_transition_to_low,
        net_lal_flow,
        net_vul_flow,
        lal_rate: birth_lal + net_transition_to_low - lal_deaths - net_lal_flow - transition_to_vul,
        vul_rate: net_vul_flow + transition_to_vul + vul_births
            - net_transition_to_low
            - vul_deaths,
    }
}

/// Vulnerable preterm odds ratio given prenatal-care coverage.
pub fn vulnerable_odds_ratio(insured_frac: f64, p: &Parameters, s: &Switches) -> f64 {
    let m = factor(s.medical_interventions);
    (1.0 - m) * p.vul_preterm_odd_ratio
        + m * p.vul_preterm_odd_ratio
            * (p.medical_care_effect * insured_frac + (1.0 - insured_frac))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Preterm {
    pub vor: f64,
    pub lal_preterm_births: f64,
    pub vul_preterm_births: f64,
    pub preterm_births: f64,
    pub total_births: f64,
    /// percent
    pub pbr: f64,
}

pub fn preterm_block(
    birth_lal: f64,
    vul_births: f64,
    insured_frac: f64,
    p: &Parameters,
    s: &Switches,
) -> Result<Preterm, ModelError> {
    let total_births = birth_lal + vul_births;
    if total_births.is_nan() || total_births <= 0.0 {
        return Err(ModelError::ZeroBirths);
    }
    let vor = vulnerable_odds_ratio(insured_frac, p, s);
    let vul_preterm_births = vor * vul_births * p.preterm_rate_lal;
    let lal_preterm_births = birth_lal * p.preterm_rate_lal;
    let preterm_births = vul_preterm_births + lal_preterm_births;
    Ok(Preterm {
        vor,
        lal_preterm_births,
        vul_preterm_births,
        preterm_births,
        total_births,
        pbr: preterm_births / total_births * 100.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::FirstOrderKind;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    const LAL0: f64 = 1_024_286.4;
    const VUL0: f64 = 398_333.6;

    fn p() -> Parameters {
        Parameters::default()
    }

    #[test]
    fn shock_window() {
        assert_eq!(financial_shock(2001.0, &p()), 0.35);
        assert_eq!(financial_shock(1999.0, &p()), 0.0);
        assert_eq!(financial_shock(2002.0, &p()), 0.0);
    }

    #[test]
    fn tax_income() {
        let base = financial_resources(LAL0, VUL0, 0.0, &p());
        assert_relative_eq!(base, 4.3936e9, max_relative = 1e-4);
        let shocked = financial_resources(LAL0, VUL0, 0.35, &p());
        assert_relative_eq!(shocked, 2.8558e9, max_relative = 1e-4);
        assert_relative_eq!(shocked, base * 0.65, max_relative = 1e-12);
        assert_eq!(financial_resources(1000.0, 0.0, 0.0, &p()), 3.5e6);
    }

    #[test]
    fn allocation_at_initial_gap() {
        let a = resource_allocation(4e9, 3.0, &p());
        // (2.76758, 0.297807) .. (4.90826, 0.389912)
        let pct = 0.297807 + (0.389912 - 0.297807) * (3.0 - 2.76758) / (4.90826 - 2.76758);
        assert_relative_eq!(a.pct_medicaid, pct, max_relative = 1e-14);
        assert_relative_eq!(a.pct_medicaid, 0.30781, max_relative = 1e-4);
        assert_relative_eq!(a.healthcare, 1.2312e9, max_relative = 1e-4);
        assert_relative_eq!(a.schools, 1.1688e9, max_relative = 1e-4);
        assert_eq!(a.other, 1.6e9);
        assert_eq!(resource_allocation(4e9, -4.0, &p()).pct_medicaid, 0.11);
        let z = resource_allocation(0.0, 3.0, &p());
        assert_eq!((z.healthcare, z.schools, z.other), (0.0, 0.0, 0.0));
    }

    fn coverage(init: f64) -> FirstOrderState {
        FirstOrderState::new(FirstOrderKind::MaterialDelay, init, 1.0).unwrap()
    }

    #[test]
    fn insurance_chain() {
        let healthcare = resource_allocation(4e9, 3.0, &p()).healthcare;
        let ins = insurance_dynamics(VUL0, healthcare, 500_000.0, &coverage(0.5), &p());
        assert_relative_eq!(ins.desired_medical_resources, 1.7128e9, max_relative = 1e-4);
        assert_relative_eq!(ins.adequacy, 4.418e8, max_relative = 1e-3);
        assert_relative_eq!(ins.changes_in_insurances, 102_740.0, max_relative = 1e-4);
        assert_eq!(ins.insured_frac, 0.5);
        assert_relative_eq!(ins.delay_input, 500_000.0 / VUL0);
    }

    #[test]
    fn insurance_equilibrium_and_clamp() {
        let vul = 300_000.0;
        let desired = vul * 4300.0;
        let ins = insurance_dynamics(vul, desired / 1.75, 0.0, &coverage(1.5), &p());
        assert_relative_eq!(ins.changes_in_insurances, 0.0, epsilon = 1e-9);
        assert_eq!(ins.insured_frac, 1.0);
        assert_eq!(
            insurance_dynamics(vul, 0.0, 0.0, &coverage(-0.2), &p()).insured_frac,
            0.0
        );
    }

    #[test]
    fn insurance_holds_delay_without_vulnerable() {
        let d = coverage(0.7);
        let ins = insurance_dynamics(0.0, 1e9, 5e5, &d, &p());
        assert_eq!(ins.delay_input, 0.7);
        assert_eq!(d.level_rate(ins.delay_input), 0.0);
        assert_eq!(ins.insured_frac, 0.7);
    }

    #[test]
    fn school_funding_at_start() {
        let schools = resource_allocation(4e9, 3.0, &p()).schools;
        let sf = school_funding(LAL0, VUL0, schools, 0.0, &p(), &Switches::default());
        assert_relative_eq!(sf.available, 206_788.0, max_relative = 1e-4);
        assert_relative_eq!(sf.desired, 295_905.0, max_relative = 1e-5);
        assert_relative_eq!(sf.adequacy, -89_117.0, max_relative = 1e-3);
        assert_eq!(sf.gate, 0.0);
        assert_eq!(sf.upward_mobility, 0.0);
    }

    #[test]
    fn school_funding_surplus() {
        let sf = school_funding(72.0, 28.0, 0.0, 100.0, &p(), &Switches::default());
        assert_eq!(sf.gate, 1.0);
        assert_relative_eq!(sf.transition_fraction, 0.1184, max_relative = 1e-12);
        assert_relative_eq!(sf.upward_mobility, 0.02368, max_relative = 1e-12);
        let off = Switches {
            education: false,
            ..Switches::default()
        };
        assert_eq!(
            school_funding(72.0, 28.0, 0.0, 100.0, &p(), &off).upward_mobility,
            0.0
        );
    }

    #[test]
    fn school_gate_floors_at_minus_one() {
        let sf = school_funding(1000.0, 500.0, 0.0, -1e9, &p(), &Switches::default());
        assert_eq!(sf.gate, -1.0);
        let sf = school_funding(1000.0, 500.0, 0.0, -160.0, &p(), &Switches::default());
        assert_relative_eq!(sf.gate, -0.5);
    }

    #[test]
    fn crime_examples() {
        let rate = community_crime_rate(72.0, 28.0, &p());
        assert_relative_eq!(rate, 828.0, max_relative = 1e-12);
        let rel = relative_crime(72.0, 28.0, 1995.0, &p());
        assert_relative_eq!(rel, 828.0 / 684.46, max_relative = 1e-12);
        assert_relative_eq!(rel, 1.2097, max_relative = 1e-4);
        assert_eq!(lal_outmigration(1.0, &p(), &Switches::default()), 0.0);
        // out of the table range on both sides
        assert_eq!(lal_outmigration(0.1, &p(), &Switches::default()), -0.015);
        assert_eq!(lal_outmigration(5.0, &p(), &Switches::default()), 0.015);
    }

    #[test]
    fn crime_block_uses_smoothed_states() {
        let perception =
            FirstOrderState::new(FirstOrderKind::InformationSmooth, 1.25, 1.0).unwrap();
        let vin = FirstOrderState::new(FirstOrderKind::InformationSmooth, 0.002, 1.0).unwrap();
        let c = crime_block(
            LAL0,
            VUL0,
            2001.0,
            &perception,
            &vin,
            &p(),
            &Switches::default(),
        );
        assert_eq!(c.national_rate, 504.5);
        assert_eq!(c.frac_lal_out, 0.01);
        assert_eq!(c.frac_vul_in, 0.002);
        assert_relative_eq!(c.vul_immigration_input, 0.0045, max_relative = 1e-12);
        assert_relative_eq!(c.net_migration, -0.01 * LAL0 + 0.002 * VUL0);
    }

    #[test]
    fn population_examples() {
        let f = population_flows(LAL0, VUL0, 0.0, 0.0, 0.0, 0.0, &p());
        assert_relative_eq!(f.birth_lal, 15_364.296, max_relative = 1e-9);
        assert_relative_eq!(f.vul_births, 5_975.004, max_relative = 1e-9);
        assert_eq!(f.lal_rate, 0.0);
        assert_eq!(f.vul_rate, 0.0);
        let shock = financial_shock(2001.0, &p());
        let f = population_flows(LAL0, VUL0, 0.0, 0.0, 0.0, shock, &p());
        assert_relative_eq!(f.transition_to_vul, 0.14 * LAL0, max_relative = 1e-12);
    }

    #[test]
    fn odds_ratio_endpoints() {
        let s = Switches::default();
        assert_eq!(vulnerable_odds_ratio(0.0, &p(), &s), 2.03);
        assert!((vulnerable_odds_ratio(1.0, &p(), &s) - 1.7458).abs() <= 1e-12);
        let off = Switches {
            medical_interventions: false,
            ..s
        };
        assert_eq!(vulnerable_odds_ratio(0.8, &p(), &off), 2.03);
    }

    #[test]
    fn preterm_examples() {
        let s = Switches::default();
        let b = population_flows(LAL0, VUL0, 0.0, 0.0, 0.0, 0.0, &p());
        let pt = preterm_block(b.birth_lal, b.vul_births, 0.5, &p(), &s).unwrap();
        assert_relative_eq!(pt.vor, 1.8879, max_relative = 1e-12);
        assert!((pt.pbr - 12.99).abs() < 0.01, "{}", pt.pbr);
        let pt = preterm_block(1000.0, 0.0, 0.3, &p(), &s).unwrap();
        assert_relative_eq!(pt.pbr, 10.4, max_relative = 1e-12);
        assert!(matches!(
            preterm_block(0.0, 0.0, 0.5, &p(), &s),
            Err(ModelError::ZeroBirths)
        ));
    }

    proptest! {
        #[test]
        fn odds_ratio_non_increasing(a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
            let s = Switches::default();
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(vulnerable_odds_ratio(hi, &p(), &s) <= vulnerable_odds_ratio(lo, &p(), &s));
        }

        #[test]
        fn pbr_bounds(lal in 0.0f64..2e6, vul in 0.0f64..2e6, ins in 0.0f64..=1.0) {
            prop_assume!(lal + vul > 1.0);
            let s = Switches::default();
            let pt = preterm_block(0.015 * lal, 0.015 * vul, ins, &p(), &s).unwrap();
            prop_assert!(pt.pbr >= 10.4 - 1e-9 && pt.pbr <= 21.112 + 1e-9);
        }

        #[test]
        fn crime_rate_bounds(lal in 0.0f64..2e6, vul in 0.0f64..2e6) {
            prop_assume!(lal + vul > 1.0);
            let r = community_crime_rate(lal, vul, &p());
            prop_assert!((450.0 - 1e-9..=1800.0 + 1e-9).contains(&r));
        }

        #[test]
        fn transition_fraction_bounds(
            lal in 1.0f64..2e6,
            vul in 0.0f64..2e6,
            status in -1e7f64..1e7,
        ) {
            let sf = school_funding(lal, vul, 0.0, status, &p(), &Switches::default());
            let bound = 0.32 * 0.65 + 1e-12;
            prop_assert!(sf.gate >= -1.0 && sf.gate <= 1.0);
            prop_assert!(sf.transition_fraction.abs() <= bound);
        }

        #[test]
        fn internal_transitions_cancel(
            lal in 0.0f64..2e6,
            vul in 0.0f64..2e6,
            up in -0.1f64..0.1,
            shock in 0.0f64..0.7,
        ) {
            let f = population_flows(lal, vul, up, 0.0, 0.0, shock, &p());
            let total = f.lal_rate + f.vul_rate;
            let expected = f.birth_lal + f.vul_births - f.lal_deaths - f.vul_deaths;
            prop_assert!((total - expected).abs() <= 1e-9 * (lal + vul).max(1.0));
        }
    }
}
