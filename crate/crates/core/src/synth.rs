//! Deterministic synthetic credit-scoring dataset.
//!
//! Mirrors the classic German credit layout: 1000 rows, a binary `default`
//! target, 20 features of which 13 are categorical, and a 61-wide one-hot
//! expansion. Rows are driven by shared latent factors (creditworthiness,
//! wealth, life stage) plus several hard dependencies — employment history
//! capped by age, property tied to housing, bank credit count tied to credit
//! history, purpose tied to loan size — so that independence-breaking
//! perturbations are detectable while conditionally sampled ones are not.
//!
//! Everything is a pure function of (n_rows, seed, row index).

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::seeding::derive_rng;
use crate::tabular::{load_csv_reader, Dataset, LoadOptions};

pub const TARGET_COLUMN: &str = "default";

/// Seed of the dataset shipped in `data/german_credit_synth.csv`.
pub const DEFAULT_SEED: u64 = 7;

pub const HEADERS: [&str; 21] = [
    "default",
    "account_check_status",
    "duration_in_month",
    "credit_history",
    "purpose",
    "credit_amount",
    "savings",
    "present_emp_since",
    "installment_as_income_perc",
    "personal_status_sex",
    "other_debtors",
    "present_res_since",
    "property",
    "age",
    "other_installment_plans",
    "housing",
    "credits_this_bank",
    "job",
    "people_under_maintenance",
    "telephone",
    "foreign_worker",
];

const ACCOUNT_CHECK: [&str; 4] = [
    "< 0 DM",
    "0 <= ... < 200 DM",
    ">= 200 DM / salary assignments for at least 1 year",
    "no checking account",
];
const CREDIT_HISTORY: [&str; 5] = [
    "delay in paying off in the past",
    "no credits taken/ all credits paid back duly",
    "existing credits paid back duly till now",
    "all credits at this bank paid back duly",
    "critical account/ other credits existing (not at this bank)",
];
const PURPOSE: [&str; 10] = [
    "car (new)",
    "car (used)",
    "furniture/equipment",
    "radio/television",
    "domestic appliances",
    "repairs",
    "education",
    "retraining",
    "business",
    "others",
];
const SAVINGS: [&str; 5] = [
    "... < 100 DM",
    "100 <= ... < 500 DM",
    "500 <= ... < 1000 DM",
    ".. >= 1000 DM",
    "unknown/ no savings account",
];
const EMPLOYMENT: [&str; 5] = [
    "unemployed",
    "... < 1 year",
    "1 <= ... < 4 years",
    "4 <= ... < 7 years",
    ".. >= 7 years",
];
const STATUS_SEX: [&str; 4] = [
    "male : divorced/separated",
    "female : divorced/separated/married",
    "male : single",
    "male : married/widowed",
];
const OTHER_DEBTORS: [&str; 3] = ["none", "co-applicant", "guarantor"];
const PROPERTY: [&str; 4] = [
    "real estate",
    "building society savings agreement/ life insurance",
    "car or other",
    "unknown / no property",
];
const INSTALLMENT_PLANS: [&str; 3] = ["bank", "stores", "none"];
const HOUSING: [&str; 3] = ["rent", "own", "for free"];
const JOB: [&str; 4] = [
    "unemployed/ unskilled - non-resident",
    "unskilled - resident",
    "skilled employee / official",
    "management/ self-employed/ highly qualified employee/ officer",
];
const TELEPHONE: [&str; 2] = ["none", "yes, registered under the customers name"];
const FOREIGN: [&str; 2] = ["yes", "no"];

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn bucket(value: f64, thresholds: &[f64]) -> usize {
    thresholds.iter().take_while(|t| value > **t).count()
}

struct Row {
    cells: Vec<String>,
}

fn generate_row(rng: &mut impl Rng) -> Row {
    let n = |rng: &mut dyn rand::RngCore| -> f64 { rng.sample(StandardNormal) };

    // Latent factors.
    let quality: f64 = n(rng);
    let wealth: f64 = 0.6 * quality + 0.8 * n(rng);
    let stage: f64 = n(rng);

    // Age and everything anchored to it.
    let age = (36.0 + 11.0 * (0.85 * stage + 0.15 * n(rng)))
        .round()
        .clamp(19.0, 75.0);

    let emp_lat = 0.55 * stage + 0.35 * quality + 0.45 * n(rng);
    let mut employment = bucket(emp_lat, &[-1.1, -0.55, 0.35, 1.0]);
    // Hard cap: long employment histories are impossible at a young age.
    if age < 25.0 {
        employment = employment.min(2);
    } else if age < 29.0 {
        employment = employment.min(3);
    }

    let res_lat = 0.5 * stage + 0.7 * n(rng);
    let mut residence = 1 + bucket(res_lat, &[-0.7, -0.1, 0.6]);
    if age < 23.0 {
        residence = residence.min(2);
    }

    let job_lat = 0.8 * wealth + 0.6 * n(rng);
    let job = bucket(job_lat, &[-1.5, -0.55, 1.15]);

    // Phone registration follows job standing closely.
    let phone_p = match job {
        3 => 0.95,
        0 => 0.05,
        _ => sigmoid(1.1 * wealth + 0.3 * stage - 0.2),
    };
    let telephone = usize::from(rng.random_bool(phone_p));

    let housing_lat = 0.9 * wealth + 0.45 * stage + 0.5 * n(rng);
    let housing = if housing_lat > -0.35 {
        1 // own
    } else if rng.random_bool(0.62) {
        0 // rent
    } else {
        2 // for free
    };

    // Property follows wealth but is tightly tied to housing.
    let prop_lat = 1.0 * wealth + 0.35 * stage + 0.45 * n(rng);
    let mut property = 3 - bucket(prop_lat, &[-0.8, 0.05, 0.95]);
    if housing == 1 && property == 3 && rng.random_bool(0.97) {
        property = 2;
    }
    if housing == 2 && rng.random_bool(0.95) {
        property = 3;
    }
    if housing == 0 && property < 2 && rng.random_bool(0.9) {
        property = 2 + usize::from(rng.random_bool(0.5));
    }

    let acs_lat = 1.0 * quality + 0.35 * wealth + 0.8 * n(rng);
    let account_check = bucket(acs_lat, &[-0.85, 0.15, 0.8]);

    // Savings track the checking-account standing closely.
    let savings = if rng.random_bool(0.12) {
        4 // unknown / no savings account
    } else {
        let sav_lat = 0.95 * acs_lat + 0.3 * wealth + 0.28 * n(rng);
        bucket(sav_lat, &[0.6, 1.45, 2.0])
    };

    let hist_lat = 0.6 * quality + 0.3 * stage + 0.75 * n(rng);
    let history = bucket(hist_lat, &[-1.5, -1.0, 0.9, 1.5]);

    let credits_lat = 0.45 * stage + 0.8 * n(rng);
    let mut credits = 1 + bucket(credits_lat, &[0.55, 1.7, 2.6]);
    // No credit history at this bank implies a single (the current) credit.
    if history == 1 {
        credits = 1;
    }

    let dur_lat = -0.4 * wealth - 0.25 * quality + 0.85 * n(rng);
    let mut duration = (18.0 + 11.0 * dur_lat).round().clamp(4.0, 72.0);
    if rng.random_bool(0.7) {
        duration = (duration / 3.0).round() * 3.0;
        duration = duration.clamp(6.0, 72.0);
    }

    let dur_z = (duration - 18.0) / 12.0;
    let amount = (7.55 + 0.5 * dur_z + 0.2 * wealth + 0.28 * n(rng))
        .exp()
        .round()
        .clamp(250.0, 18500.0);

    // Purpose depends on the loan size bracket.
    let base_weights: [f64; 10] = [23.0, 10.0, 18.0, 28.0, 3.0, 4.0, 5.0, 2.0, 10.0, 3.0];
    let mut weights = base_weights;
    if amount > 5500.0 {
        for (i, w) in weights.iter_mut().enumerate() {
            *w *= match i {
                0 | 1 | 8 | 9 => 3.0,
                3 | 4 | 5 => 0.15,
                _ => 1.0,
            };
        }
    } else if amount < 1300.0 {
        for (i, w) in weights.iter_mut().enumerate() {
            *w *= match i {
                3 | 4 | 5 | 2 => 2.5,
                0 | 1 | 8 => 0.25,
                _ => 1.0,
            };
        }
    }
    let total: f64 = weights.iter().sum();
    let mut draw = rng.random_range(0.0..total);
    let mut purpose = 0;
    for (i, w) in weights.iter().enumerate() {
        if draw < *w {
            purpose = i;
            break;
        }
        draw -= w;
    }

    let am_z = (amount.ln() - 7.75) / 0.6;
    let inst_lat = -0.35 * wealth + 0.25 * am_z + 0.8 * n(rng);
    let installment = 1 + bucket(inst_lat, &[-1.2, -0.55, 0.1]);

    let debtors = {
        let r: f64 = rng.random_range(0.0..1.0);
        if r < 0.905 {
            0
        } else if r < 0.948 {
            1
        } else {
            2
        }
    };

    let oip_lat = 0.4 * quality + 0.9 * n(rng);
    let plans = if oip_lat > -1.15 {
        2 // none
    } else if oip_lat > -1.65 {
        0 // bank
    } else {
        1 // stores
    };

    let status = {
        let r: f64 = rng.random_range(0.0..1.0);
        let young_single = if stage < -0.3 { 0.12 } else { 0.0 };
        if r < 0.05 {
            0
        } else if r < 0.36 - young_single {
            1
        } else if r < 0.91 + young_single * 0.5 {
            2
        } else {
            3
        }
    };

    let people = if status == 3 || (status == 1 && rng.random_bool(0.25)) {
        1 + usize::from(rng.random_bool(0.45))
    } else {
        1 + usize::from(rng.random_bool(0.10))
    };

    let foreign = usize::from(rng.random_bool(0.10));

    // Default probability.
    const ACS_EFF: [f64; 4] = [1.15, 0.45, -0.45, -1.05];
    const HIST_EFF: [f64; 5] = [0.75, 0.35, -0.05, -0.25, -0.55];
    const SAV_EFF: [f64; 5] = [0.5, 0.1, -0.2, -0.5, -0.2];
    const EMP_EFF: [f64; 5] = [0.5, 0.3, 0.0, -0.15, -0.35];
    const PURPOSE_EFF: [f64; 10] = [0.3, -0.35, 0.05, -0.05, 0.1, 0.3, 0.35, -0.2, 0.1, 0.25];
    const STATUS_EFF: [f64; 4] = [0.4, 0.28, -0.22, -0.05];
    const DEBTORS_EFF: [f64; 3] = [0.0, 0.25, -0.55];
    const PROP_EFF: [f64; 4] = [-0.4, -0.12, 0.1, 0.5];
    const HOUSING_EFF: [f64; 3] = [0.3, -0.18, 0.15];
    const PLANS_EFF: [f64; 3] = [0.35, 0.2, -0.12];
    const FOREIGN_EFF: [f64; 2] = [0.28, -0.45];
    const JOB_EFF: [f64; 4] = [0.12, 0.03, -0.02, -0.08];
    const TEL_EFF: [f64; 2] = [0.05, -0.05];
    const CREDITS_EFF: [f64; 4] = [0.0, -0.05, -0.1, -0.1];

    let logit = -1.45
        + ACS_EFF[account_check]
        + HIST_EFF[history]
        + SAV_EFF[savings]
        + EMP_EFF[employment]
        + PURPOSE_EFF[purpose]
        + STATUS_EFF[status]
        + DEBTORS_EFF[debtors]
        + PROP_EFF[property]
        + HOUSING_EFF[housing]
        + PLANS_EFF[plans]
        + FOREIGN_EFF[foreign]
        + JOB_EFF[job]
        + TEL_EFF[telephone]
        + CREDITS_EFF[credits - 1]
        + 0.030 * (duration - 20.0)
        + 0.25 * am_z
        + 0.16 * (installment as f64 - 2.5)
        - 0.022 * (age - 36.0)
        + 0.08 * (people as f64 - 1.0);

    let default = usize::from(rng.random_bool(sigmoid(logit)));

    let cells = vec![
        default.to_string(),
        ACCOUNT_CHECK[account_check].to_string(),
        format!("{duration}"),
        CREDIT_HISTORY[history].to_string(),
        PURPOSE[purpose].to_string(),
        format!("{amount}"),
        SAVINGS[savings].to_string(),
        EMPLOYMENT[employment].to_string(),
        installment.to_string(),
        STATUS_SEX[status].to_string(),
        OTHER_DEBTORS[debtors].to_string(),
        residence.to_string(),
        PROPERTY[property].to_string(),
        format!("{age}"),
        INSTALLMENT_PLANS[plans].to_string(),
        HOUSING[housing].to_string(),
        credits.to_string(),
        JOB[job].to_string(),
        people.to_string(),
        TELEPHONE[telephone].to_string(),
        FOREIGN[foreign].to_string(),
    ];
    Row { cells }
}

/// The generated table as CSV text (header row included).
pub fn csv_string(n_rows: usize, seed: u64) -> String {
    let mut out = String::new();
    out.push_str(&HEADERS.join(","));
    out.push('\n');
    for row_idx in 0..n_rows {
        let mut rng = derive_rng(seed, &[0x5d47, row_idx as u64]);
        let row = generate_row(&mut rng);
        let line: Vec<String> = row
            .cells
            .iter()
            .map(|c| {
                if c.contains(',') {
                    format!("\"{c}\"")
                } else {
                    c.clone()
                }
            })
            .collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

pub fn write_csv(path: &std::path::Path, n_rows: usize, seed: u64) -> Result<()> {
    std::fs::write(path, csv_string(n_rows, seed))?;
    Ok(())
}

/// Loads the generated table through the normal ingestion path.
pub fn dataset(n_rows: usize, seed: u64) -> Result<Dataset> {
    let csv = csv_string(n_rows, seed);
    load_csv_reader(csv.as_bytes(), TARGET_COLUMN, &LoadOptions::default())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tabular::{onehot_width, FeatureKind};

    #[test]
    fn shape_matches_the_credit_layout() {
        let ds = dataset(1000, DEFAULT_SEED).unwrap();
        assert_eq!(ds.n_rows(), 1000);
        assert_eq!(ds.n_features(), 20);
        let categorical = ds
            .schema
            .iter()
            .filter(|f| f.kind() == FeatureKind::Categorical)
            .count();
        assert_eq!(categorical, 13);
        assert_eq!(onehot_width(&ds.schema), 61);
        assert_eq!(ds.label_names, vec!["0", "1"]);
    }

    #[test]
    fn generation_is_deterministic() {
        assert_eq!(csv_string(50, 3), csv_string(50, 3));
        assert_ne!(csv_string(50, 3), csv_string(50, 4));
    }

    #[test]
    fn default_rate_is_plausible() {
        let ds = dataset(1000, DEFAULT_SEED).unwrap();
        let rate = ds.labels.iter().filter(|&&l| l == 1).count() as f64 / 1000.0;
        assert!((0.2..=0.4).contains(&rate), "default rate {rate}");
    }

    fn level_index(ds: &Dataset, feature: &str, prefix: &str) -> f64 {
        let j = ds.feature_index(feature).unwrap();
        match &ds.schema[j].domain {
            crate::tabular::FeatureDomain::Categorical { levels } => {
                levels.iter().position(|l| l.starts_with(prefix)).unwrap() as f64
            }
            _ => panic!("{feature} is not categorical"),
        }
    }

    #[test]
    fn hard_dependencies_hold() {
        let ds = dataset(1000, DEFAULT_SEED).unwrap();
        let age = ds.feature_index("age").unwrap();
        let emp = ds.feature_index("present_emp_since").unwrap();
        let hist = ds.feature_index("credit_history").unwrap();
        let credits = ds.feature_index("credits_this_bank").unwrap();
        let seven_years = level_index(&ds, "present_emp_since", ".. >= 7 years");
        let no_credits = level_index(&ds, "credit_history", "no credits taken");
        let mut seen_seven = 0;
        let mut seen_no_credits = 0;
        for row in &ds.rows {
            // Long employment histories never occur below age 29.
            if row[emp] == seven_years {
                seen_seven += 1;
                assert!(row[age] >= 29.0, "age {} with >=7y employment", row[age]);
            }
            // No credit history at this bank forces credits_this_bank = 1.
            if row[hist] == no_credits {
                seen_no_credits += 1;
                assert_eq!(row[credits], 1.0);
            }
        }
        assert!(seen_seven > 10 && seen_no_credits > 10);
    }
}
