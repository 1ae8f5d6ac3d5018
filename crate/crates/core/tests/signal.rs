use chrono::{NaiveDate, NaiveDateTime, Timelike};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rec_sizer::signal::{
    extract_rep_days, fit_seasonal_model, representative_dates, representative_days,
    weather_rep_days, ExtractOptions, LambdaChoice, Season,
};
use rec_sizer::synth::{clear_sky_irradiance, synthetic_weather, LoadShape};
use rec_sizer::types::{TimeSeries, Weather};

fn start() -> NaiveDateTime {
    NaiveDate::from_ymd_opt(2023, 1, 1)
        .unwrap()
        .and_hms_opt(0, 0, 0)
        .unwrap()
}

fn rel_rmse(got: &[f64], truth: &[f64]) -> f64 {
    let mse = got
        .iter()
        .zip(truth)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        / got.len() as f64;
    let mean = truth.iter().sum::<f64>() / truth.len() as f64;
    mse.sqrt() / mean
}

#[test]
fn representative_days_track_the_noiseless_generator() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..3 {
        let shape = LoadShape::household(&mut rng);
        let load = shape.sample(&mut rng, start(), 8760).unwrap();
        let model = fit_seasonal_model(&load, &ExtractOptions::default()).unwrap();
        assert!(model.converged);
        let dates = representative_dates(load.start, load.span_hours());
        let days = representative_days(&model, dates).unwrap();
        for (s, d) in Season::ALL.iter().zip(dates) {
            let midnight = d.and_hms_opt(0, 0, 0).unwrap();
            let offset = (midnight - start()).num_hours() as f64;
            let truth: Vec<f64> = (0..24)
                .map(|h| shape.noiseless(start(), offset + h as f64))
                .collect();
            let err = rel_rmse(days.profile(*s), &truth);
            assert!(err <= 0.10, "{s}: relative RMSE {err}");
        }
    }
}

#[test]
fn zero_lambda_is_least_squares() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let shape = LoadShape::household(&mut rng);
    let load = shape.sample(&mut rng, start(), 8760).unwrap();
    let opts = ExtractOptions {
        lambda: LambdaChoice::Fixed(0.0),
        ..ExtractOptions::default()
    };
    let m = fit_seasonal_model(&load, &opts).unwrap();
    assert_eq!(m.lambda, 0.0);
    assert!(m.converged);
    // no coefficient is shrunk to zero without a penalty
    assert!(m.theta.iter().all(|&t| t != 0.0));
}

#[test]
fn cross_validation_picks_a_grid_point() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let shape = LoadShape::household(&mut rng);
    let load = shape.sample(&mut rng, start(), 8760).unwrap();
    let opts = ExtractOptions {
        lambda: LambdaChoice::CrossValidated { folds: 5, grid: 20 },
        ..ExtractOptions::default()
    };
    let m = fit_seasonal_model(&load, &opts).unwrap();
    assert!(m.lambda > 0.0);
}

#[test]
fn constant_load_gives_flat_days() {
    let load = TimeSeries::hourly(start(), vec![1.3; 8760]).unwrap();
    let m = fit_seasonal_model(&load, &ExtractOptions::default()).unwrap();
    let days =
        representative_days(&m, representative_dates(load.start, load.span_hours())).unwrap();
    for p in &days.profiles {
        assert!(p.iter().all(|v| (v - 1.3).abs() < 1e-9));
    }
}

#[test]
fn weather_means_follow_the_clear_sky_amplitude() {
    let w = synthetic_weather(&mut ChaCha8Rng::seed_from_u64(2), start(), 8760, 0.0).unwrap();
    let (irr, _) = weather_rep_days(&w).unwrap();
    // generator's seasonal mean at each hour of day
    let mut truth = [[0.0; 24]; 4];
    let mut count = [[0usize; 24]; 4];
    for ts in w.irradiance.timestamps() {
        let s = Season::of_month(chrono::Datelike::month(&ts)).index();
        truth[s][ts.hour() as usize] += clear_sky_irradiance(ts);
        count[s][ts.hour() as usize] += 1;
    }
    let daily = |p: &[f64]| p.iter().sum::<f64>();
    let truth_daily: Vec<f64> = (0..4)
        .map(|s| (0..24).map(|h| truth[s][h] / count[s][h] as f64).sum())
        .collect();
    let amp = (daily(irr.profile(Season::Summer)) - daily(irr.profile(Season::Winter))) / 2.0;
    let truth_amp = (truth_daily[2] - truth_daily[0]) / 2.0;
    assert!(((amp - truth_amp) / truth_amp).abs() <= 0.05);
}

#[test]
fn extraction_covers_every_participant() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let weather: Weather = synthetic_weather(&mut rng, start(), 8760, 0.4).unwrap();
    let demands: Vec<(String, TimeSeries)> = (0..3)
        .map(|n| {
            let shape = LoadShape::household(&mut rng);
            (
                format!("p{n}"),
                shape.sample(&mut rng, start(), 8760).unwrap(),
            )
        })
        .collect();
    let set = extract_rep_days(&demands, &weather, &ExtractOptions::default()).unwrap();
    assert_eq!(set.demand.len(), 3);
    for (_, d) in &set.demand {
        assert_eq!(d.concatenated().len(), 96);
        assert!(d.concatenated().iter().all(|&v| v > 0.0));
        assert_eq!(d.dates, set.dates);
    }
    let again = extract_rep_days(&demands, &weather, &ExtractOptions::default()).unwrap();
    assert_eq!(set, again);
}
