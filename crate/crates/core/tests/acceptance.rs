//! Acceptance criteria, one PASS/FAIL line each.
//!
//! | # | criterion                                   | tolerance        |
//! |---|---------------------------------------------|------------------|
//! | 1 | Gibbs closed form vs numeric                | 1e-10, < 5 s     |
//! | 2 | evolved-state closed form vs numeric        | 1e-9,  < 10 s    |
//! | 3 | three ergotropy routes pairwise             | 1e-9             |
//! | 4 | closed-form power vs finite difference      | 1e-5             |
//! | 5 | capacity reconciliation and limits          | 1e-10 / exact 0  |
//! | 6 | figure-claim orderings (a)–(e)              | see each line    |
//! | 7 | state/operator sanity on a random cloud     | 1e-10 / 1e-12    |
//! | 8 | determinism of full figure runs             | byte-identical   |
//!
//! Some figure claims do not hold for the model as specified: the numbers
//! are printed and the line reads FAIL. Those criteria are listed in
//! `KNOWN_UNATTAINABLE` (analysis in the README). The process exits non-zero
//! if any other criterion fails, or if a listed one unexpectedly passes.

use std::f64::consts::{FRAC_PI_2, PI};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sqbattery::dynamics::{charging_unitary_closed_form, evolved_state_entries};
use sqbattery::linalg::{hermitian_eigendecomposition, unitary_from_hamiltonian};
use sqbattery::metrics::{
    capacity_closed_form, capacity_definitional, ergotropy_closed_form,
    instantaneous_power_closed_form, l1_coherence, NumericPipeline,
};
use sqbattery::model::{build_charging_hamiltonian, gibbs_state_closed_form, gibbs_state_numeric};
use sqbattery::sweep::{
    figure_preset, preset_parameter_points, run_sweep, SweepResult, TauGrid, PRESET_VALUES,
};
use sqbattery::verify::{random_parameter_cloud, CLOUD_SEED, CLOUD_SIZE};
use sqbattery::{BatteryParams, ChargingTime, ClosedFormMode, ComplexMatrix, DensityMatrix};

const KNOWN_UNATTAINABLE: [&str; 3] = ["6a", "6b", "6e"];

struct Harness {
    results: Vec<(String, bool)>,
}

impl Harness {
    fn check(&mut self, id: &str, name: &str, passed: bool, detail: String) {
        let known = KNOWN_UNATTAINABLE.contains(&id);
        let tag = match (passed, known) {
            (true, _) => "PASS",
            (false, true) => "FAIL (known)",
            (false, false) => "FAIL",
        };
        println!("[{tag}] {id:<3} {name}: {detail}");
        self.results.push((id.to_string(), passed));
    }

    fn finish(self) -> i32 {
        let passed = self.results.iter().filter(|r| r.1).count();
        println!("\n{passed}/{} criteria passed", self.results.len());
        let unexpected: Vec<&str> = self
            .results
            .iter()
            .filter(|(id, ok)| *ok == KNOWN_UNATTAINABLE.contains(&id.as_str()))
            .map(|(id, _)| id.as_str())
            .collect();
        if unexpected.is_empty() {
            println!("all outcomes as documented");
            0
        } else {
            println!("unexpected outcome for: {}", unexpected.join(", "));
            1
        }
    }
}

fn tau(x: f64) -> ChargingTime {
    ChargingTime::new(x).unwrap()
}

fn secs(d: Duration) -> String {
    format!("{:.3}s", d.as_secs_f64())
}

fn grid_points() -> Vec<f64> {
    TauGrid::default().points()
}

fn gibbs_equivalence(h: &mut Harness) {
    let start = Instant::now();
    let mut points = preset_parameter_points();
    points.extend(random_parameter_cloud(CLOUD_SIZE, CLOUD_SEED));
    let worst = points
        .iter()
        .map(|p| {
            let closed = gibbs_state_closed_form(p).unwrap();
            let numeric = NumericPipeline::new(p).unwrap().thermal;
            closed.matrix().max_abs_diff(numeric.matrix())
        })
        .fold(0.0, f64::max);
    let elapsed = start.elapsed();
    h.check(
        "1",
        "Gibbs closed form vs numeric",
        worst <= 1e-10 && elapsed < Duration::from_secs(5),
        format!(
            "max residual {worst:.3e} over {} parameter sets (tol 1e-10), {}",
            points.len(),
            secs(elapsed)
        ),
    );
}

fn evolved_equivalence(h: &mut Harness) {
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut n = 0;
    for p in preset_parameter_points() {
        let pipe = NumericPipeline::new(&p).unwrap();
        for x in grid_points() {
            let closed = evolved_state_entries(&p, tau(x), ClosedFormMode::Corrected).unwrap();
            worst = worst.max(closed.max_abs_diff(pipe.evolved_at(x).unwrap().matrix()));
            n += 1;
        }
    }
    let elapsed = start.elapsed();
    h.check(
        "2",
        "evolved state closed form vs U R_th U†",
        worst <= 1e-9 && elapsed < Duration::from_secs(10),
        format!(
            "max residual {worst:.3e} over {n} (preset, tau) cells (tol 1e-9), {}",
            secs(elapsed)
        ),
    );
}

fn ergotropy_triple(h: &mut Harness) {
    let mut worst = 0.0f64;
    for p in preset_parameter_points() {
        let pipe = NumericPipeline::new(&p).unwrap();
        for x in grid_points() {
            let general = pipe.ergotropy_at(x).unwrap();
            let reference = pipe.ergotropy_vs_thermal_at(x).unwrap();
            let closed = ergotropy_closed_form(&p, tau(x), ClosedFormMode::Corrected).unwrap();
            worst = worst
                .max((general - reference).abs())
                .max((general - closed).abs())
                .max((reference - closed).abs());
        }
    }
    h.check(
        "3",
        "ergotropy: spectral vs thermal-reference vs closed form",
        worst <= 1e-9,
        format!("max pairwise residual {worst:.3e} (tol 1e-9)"),
    );
}

fn power_derivative(h: &mut Harness) {
    let mut worst = 0.0f64;
    let (mut num, mut den) = (0.0, 0.0);
    for p in preset_parameter_points() {
        let pipe = NumericPipeline::new(&p).unwrap();
        for x in grid_points() {
            let closed =
                instantaneous_power_closed_form(&p, tau(x), ClosedFormMode::Corrected).unwrap();
            let fd = pipe.power_fd_at(x, 1e-4).unwrap();
            worst = worst.max((closed - fd).abs());
            num += closed * fd;
            den += closed * closed;
        }
    }
    h.check(
        "4",
        "closed-form power vs central difference (h = 1e-4)",
        worst <= 1e-5,
        format!(
            "max residual {worst:.3e} (tol 1e-5); fitted scale factor {:.9}",
            num / den
        ),
    );
}

fn capacity_reconciliation(h: &mut Harness) {
    let mut closed_vs_thermal = 0.0f64;
    let mut definitional_max = 0.0f64;
    for p in preset_parameter_points() {
        let pipe = NumericPipeline::new(&p).unwrap();
        closed_vs_thermal = closed_vs_thermal
            .max((capacity_closed_form(&p).unwrap() - pipe.capacity_thermal()).abs());
        definitional_max = definitional_max.max(capacity_definitional(&pipe.hamiltonian).abs());
    }
    let mut limit = 0.0f64;
    for xi in [0.1, 0.5, 1.0, 1.5, 2.0, 3.0] {
        for t in [0.05, 0.1, 0.5, 1.0, 5.0] {
            let k = capacity_closed_form(&BatteryParams::degenerate(xi, xi, 0.0, t)).unwrap();
            limit = limit.max((k - xi * (xi / (2.0 * t)).tanh()).abs());
        }
    }
    h.check(
        "5",
        "capacity: closed form = xic - tr(H_B R_th); definitional = 0; tanh limit",
        closed_vs_thermal <= 1e-10 && definitional_max == 0.0 && limit <= 1e-10,
        format!(
            "reconciliation {closed_vs_thermal:.3e} (tol 1e-10), definitional max |K| {definitional_max:e} (must be 0), \
             limit {limit:.3e} (tol 1e-10)"
        ),
    );
}

fn max_ergotropies(r: &SweepResult) -> Vec<f64> {
    r.curves
        .iter()
        .map(|c| c.summary.max_ergotropy.unwrap())
        .collect()
}

fn fmt_list(v: &[f64]) -> String {
    v.iter()
        .map(|x| format!("{x:.6e}"))
        .collect::<Vec<_>>()
        .join(", ")
}

fn strictly_increasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] > w[0])
}

fn figure_claims(h: &mut Harness, runs: &[SweepResult]) {
    let [fig1, _fig2, fig3, fig4] = runs else {
        unreachable!()
    };

    let e1 = max_ergotropies(fig1);
    h.check(
        "6a",
        "fig1: max ergotropy strictly increasing in xi2 over {0.1, 0.5, 1, 2}",
        strictly_increasing(&e1),
        format!("max E = [{}]", fmt_list(&e1)),
    );

    // Argmax of the numeric ergotropy on the preset grid, first occurrence.
    let step = fig1.config.tau_grid.step();
    let argmax: Vec<f64> = fig1
        .curves
        .iter()
        .map(|c| {
            let mut best = (f64::NEG_INFINITY, 0.0);
            for cell in &c.cells {
                let e = cell.sample.unwrap().ergotropy_numeric;
                if e > best.0 {
                    best = (e, cell.tau);
                }
            }
            best.1
        })
        .collect();
    h.check(
        "6b",
        "fig1: ergotropy maximum at tau = pi/2 within one grid step",
        argmax.iter().all(|t| (t - FRAC_PI_2).abs() <= step),
        format!(
            "argmax tau = [{}] (pi/2 = {FRAC_PI_2:.6}, step {step:.6})",
            fmt_list(&argmax)
        ),
    );

    let mut edge = 0.0f64;
    for p in preset_parameter_points() {
        let pipe = NumericPipeline::new(&p).unwrap();
        for x in [0.0, PI] {
            edge = edge.max(pipe.ergotropy_at(x).unwrap().abs());
            edge = edge.max(
                ergotropy_closed_form(&p, tau(x), ClosedFormMode::Corrected)
                    .unwrap()
                    .abs(),
            );
        }
    }
    h.check(
        "6c",
        "E(0) = E(pi) = 0 for every preset curve",
        edge <= 1e-10,
        format!("max |E| {edge:.3e} (tol 1e-10)"),
    );

    let k3: Vec<f64> = fig3
        .curves
        .iter()
        .map(|c| c.summary.capacity.unwrap())
        .collect();
    h.check(
        "6d",
        "fig3: capacity strictly increasing in xic",
        strictly_increasing(&k3),
        format!("K = [{}]", fmt_list(&k3)),
    );

    let e3 = max_ergotropies(fig3);
    let e4 = max_ergotropies(fig4);
    let below: Vec<bool> = e4.iter().zip(&e3).map(|(a, b)| a < b).collect();
    h.check(
        "6e",
        "fig4 max ergotropy below fig3 at every matching xic",
        below.iter().all(|&b| b),
        format!(
            "xic = {PRESET_VALUES:?}: fig4 [{}] vs fig3 [{}]",
            fmt_list(&e4),
            fmt_list(&e3)
        ),
    );
}

fn sanity_suite(h: &mut Harness) {
    let mut rng = ChaCha8Rng::seed_from_u64(CLOUD_SEED ^ 0x7);
    let cloud = random_parameter_cloud(CLOUD_SIZE, CLOUD_SEED);
    let charging = build_charging_hamiltonian(1.0);
    let (mut state_dev, mut unitary_dev, mut min_erg, mut min_coh, mut diag_coh) =
        (0.0f64, 0.0f64, f64::INFINITY, f64::INFINITY, 0.0f64);
    for p in &cloud {
        let x = rng.gen_range(0.0..2.0 * PI);
        let h_b = sqbattery::model::build_degenerate_hamiltonian(p);
        let thermal = gibbs_state_numeric(&h_b, p.temperature).unwrap();
        let pipe = NumericPipeline::new(p).unwrap();
        let evolved = pipe.evolved_at(x).unwrap();
        for rho in [&thermal, &evolved, &gibbs_state_closed_form(p).unwrap()] {
            let m = rho.matrix();
            let min_eig = hermitian_eigendecomposition(m).unwrap().eigenvalues[0];
            state_dev = state_dev
                .max(m.hermitian_deviation())
                .max((m.trace().re - 1.0).abs())
                .max(m.trace().im.abs())
                .max((-min_eig).max(0.0));
        }
        unitary_dev = unitary_dev
            .max(charging_unitary_closed_form(tau(x)).unitarity_deviation())
            .max(
                unitary_from_hamiltonian(&charging, x)
                    .unwrap()
                    .unitarity_deviation(),
            );
        min_erg = min_erg.min(pipe.ergotropy_of(&evolved).unwrap());
        min_coh = min_coh
            .min(l1_coherence(&evolved))
            .min(l1_coherence(&thermal));
        let pops: Vec<f64> = (0..4).map(|i| evolved.matrix()[(i, i)].re).collect();
        let diagonal = DensityMatrix::new(ComplexMatrix::from_real_diagonal(&pops)).unwrap();
        diag_coh = diag_coh.max(l1_coherence(&diagonal));
    }
    h.check(
        "7",
        "state/operator sanity over 1000 random evaluations",
        state_dev <= 1e-10 && unitary_dev <= 1e-12 && min_erg >= -1e-10 && min_coh >= 0.0 && diag_coh == 0.0,
        format!(
            "density deviation {state_dev:.3e} (tol 1e-10), unitarity {unitary_dev:.3e} (tol 1e-12), \
             min ergotropy {min_erg:.3e} (>= -1e-10), min coherence {min_coh:.3e}, diagonal-state coherence {diag_coh:e}"
        ),
    );
}

fn run_figures() -> Vec<SweepResult> {
    ["fig1", "fig2", "fig3", "fig4"]
        .iter()
        .map(|n| run_sweep(&figure_preset(n).unwrap()).unwrap())
        .collect()
}

fn main() {
    let start = Instant::now();
    println!("acceptance criteria");
    let mut h = Harness {
        results: Vec::new(),
    };
    gibbs_equivalence(&mut h);
    evolved_equivalence(&mut h);
    ergotropy_triple(&mut h);
    power_derivative(&mut h);
    capacity_reconciliation(&mut h);

    let first = run_figures();
    figure_claims(&mut h, &first);
    sanity_suite(&mut h);

    let second = run_figures();
    let bytes = |runs: &[SweepResult]| -> Vec<String> {
        runs.iter()
            .map(|r| serde_json::to_string(r).unwrap())
            .collect()
    };
    let (a, b) = (bytes(&first), bytes(&second));
    let total: usize = a.iter().map(String::len).sum();
    h.check(
        "8",
        "determinism: two full fig1..fig4 runs serialize identically",
        a == b,
        format!("{} presets, {total} bytes compared", a.len()),
    );

    let elapsed = start.elapsed();
    println!("total runtime {} (budget 60s)", secs(elapsed));
    if elapsed > Duration::from_secs(60) {
        println!("[FAIL] runtime budget exceeded");
        std::process::exit(1);
    }
    std::process::exit(h.finish());
}
