//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use frechet3_core::copula3::min_box_volume_tabulated;
use frechet3_core::order::{concordance_leq3, tabulate};
use frechet3_core::product::{integrand, marginals_of_lift};
use frechet3_core::sampler::{empirical_vs_analytic, sample_lift};
use frechet3_core::*;

type Outcome = Result<String, String>;

fn quad() -> QuadratureConfig {
    QuadratureConfig::default()
}

fn fgm1() -> CopulaSpec2 {
    CopulaSpec2::fgm(1.0).unwrap()
}

fn clayton(alpha: f64) -> CopulaSpec2 {
    CopulaSpec2::clayton(alpha).unwrap()
}

fn constant(c: CopulaSpec2) -> FamilyPath {
    FamilyPath::constant(c)
}

fn example_checkerboard() -> CopulaSpec2 {
    let rows = [[6.0, 3.0, 1.0], [2.0, 4.0, 4.0], [2.0, 3.0, 5.0]];
    CopulaSpec2::checkerboard(rows.iter().map(|r| r.iter().map(|x| x / 30.0).collect()).collect()).unwrap()
}

fn families() -> [CopulaSpec2; 3] {
    [CopulaSpec2::W, CopulaSpec2::Pi, CopulaSpec2::M]
}

fn check(cond: bool, detail: String) -> Outcome {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn within(elapsed: Duration, limit: Duration, detail: String) -> Outcome {
    check(elapsed < limit, format!("{detail}; {elapsed:.2?} (limit {limit:?})"))
}

fn err(e: Error) -> String {
    format!("error: {e}")
}

// (C12 *_M Π)(1/2, 1/2) = 7/16 for the FGM(1) copula
fn criterion_1() -> Outcome {
    let start = Instant::now();
    let v = c_product(&fgm1(), &CopulaSpec2::Pi, &constant(CopulaSpec2::M), 0.5, 0.5, &quad()).map_err(err)?;
    let elapsed = start.elapsed();
    let e = (v - 7.0 / 16.0).abs();
    check(e <= 1e-6, format!("value {v:.12}, |error| {e:.1e}"))?;
    within(elapsed, Duration::from_secs(1), format!("value {v:.12}"))
}

fn criterion_2() -> Outcome {
    let q = quad();
    let g = GridSpec::new(21).unwrap();
    let step = 1.0 / 20.0;

    let a = check_triple_compat(&fgm1(), &clayton(20.0), &CopulaSpec2::Pi, g, &q).map_err(err)?;
    let w = a.witness.ok_or("FGM(1)/Clayton(20)/Π not refuted")?;
    let near = (w.point[0] - 0.5).abs() <= step + 1e-12 && (w.point[1] - 0.5).abs() <= step + 1e-12;
    check(a.is_refuted() && near, format!("(a) witness {w}"))?;

    let ww = CopulaSpec2::W;
    let b = check_triple_compat(&ww, &ww, &ww, g, &q).map_err(err)?;
    let (lo, _) = product_bounds(&ww, &ww, 0.5, 0.5, &q).map_err(err)?;
    check(
        b.is_refuted() && (lo - 0.5).abs() <= 1e-6,
        format!("(a) witness {w}; (b) refuted={}, W*_W W(1/2,1/2) = {lo:.12}", b.is_refuted()),
    )
}

/// The nine liftings `A ⋆_fam B` with `A` over {Π, FGM(1), Clayton(2)},
/// `fam` over {W, Π, M} and `B` the next entry of the first list.
fn nine_liftings() -> Vec<LiftedCopula3> {
    let base = [CopulaSpec2::Pi, fgm1(), clayton(2.0)];
    let mut out = Vec::new();
    for (i, a) in base.iter().enumerate() {
        let b = &base[(i + 1) % base.len()];
        for fam in families() {
            out.push(LiftedCopula3::constant(a.clone(), b.clone(), fam).unwrap());
        }
    }
    out
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let g = GridSpec::new(21).unwrap();
    let mut worst = 0.0f64;
    for l in nine_liftings() {
        let [m12, m13, m23] = marginals_of_lift(&l);
        for [u, v] in g.points2() {
            let d12 = (m12.cdf(u, v).map_err(err)? - l.a.eval2(u, v)).abs();
            let d13 = (m13.cdf(u, v).map_err(err)? - l.product(u, v).map_err(err)?).abs();
            let d23 = (m23.cdf(u, v).map_err(err)? - l.b.eval2(u, v)).abs();
            worst = worst.max(d12).max(d13).max(d23);
        }
    }
    let elapsed = start.elapsed();
    check(worst <= 1e-6, format!("9 liftings, max marginal deviation {worst:.1e}"))?;
    within(elapsed, Duration::from_secs(120), format!("9 liftings, max deviation {worst:.1e}"))
}

fn criterion_4() -> Outcome {
    let g = GridSpec::new(21).unwrap();
    let q = quad();
    let cb = example_checkerboard();
    let all = [
        CopulaSpec2::Pi,
        CopulaSpec2::M,
        CopulaSpec2::W,
        CopulaSpec2::fgm(-0.7).unwrap(),
        fgm1(),
        clayton(0.5),
        clayton(2.0),
        clayton(20.0),
        cb.clone(),
        cb.transposed(),
    ];
    let mut worst = 0.0f64;
    for a in &all {
        for fam in families() {
            let fam = constant(fam);
            for [u, v] in g.points2() {
                let p = c_product(a, &CopulaSpec2::M, &fam, u, v, &q).map_err(err)?;
                worst = worst.max((p - a.eval2(u, v)).abs());
            }
        }
    }
    check(
        worst <= 1e-6,
        format!("{} families x 3 C, max |A *_C M - A| {worst:.1e}", all.len()),
    )
}

fn criterion_5() -> Outcome {
    let g = GridSpec::new(11).unwrap();
    let axis = g.axis();
    let mut lifts = nine_liftings();
    let piecewise =
        FamilyPath::new(vec![0.0, 0.3, 0.7, 1.0], vec![CopulaSpec2::M, clayton(3.0), CopulaSpec2::W]).unwrap();
    lifts.push(LiftedCopula3::new(fgm1(), example_checkerboard(), piecewise, quad()).unwrap());
    let mut worst = f64::INFINITY;
    for l in &lifts {
        let table = tabulate(l, g).map_err(err)?;
        let (min, _) = min_box_volume_tabulated(&table, &axis);
        worst = worst.min(min);
    }
    check(
        worst >= -1e-6,
        format!("{} liftings, all boxes on 11^3, min volume {worst:.1e}", lifts.len()),
    )
}

fn criterion_6() -> Outcome {
    let g = GridSpec::new(11).unwrap();
    let [w, p, m] = families().map(|fam| LiftedCopula3::constant(CopulaSpec2::Pi, CopulaSpec2::Pi, fam).unwrap());
    let lower = concordance_leq3(&w, &p, g, 1e-6).map_err(err)?;
    let upper = concordance_leq3(&p, &m, g, 1e-6).map_err(err)?;
    check(
        lower.holds() && upper.holds(),
        format!(
            "violations {} + {} over {} points (plain and survival)",
            lower.violations, upper.violations, lower.points_checked
        ),
    )
}

/// `max (C_L - F_L)` for the constructed FGM(1) triple on the 11^3 grid.
const FGM_TRIPLE_GAP: f64 = 0.01;

fn criterion_7() -> Outcome {
    let g = GridSpec::new(11).unwrap();
    let q = quad();
    let pi = CopulaSpec2::Pi;

    // constructed triple: C13 = C12 *_Π C23 with C12 = FGM(1), C23 = Π
    let built = c_product(&fgm1(), &pi, &constant(pi.clone()), 0.3, 0.8, &q).map_err(err)?;
    check((built - 0.24).abs() < 1e-12, format!("FGM(1) *_Π Π (0.3,0.8) = {built}"))?;

    let triples = [
        ("(Π,Π,Π)", pi.clone(), pi.clone(), pi.clone()),
        ("(FGM(1),Π,Π)", fgm1(), pi.clone(), pi.clone()),
        ("(Clayton(2),Clayton(2),M)", clayton(2.0), clayton(2.0), CopulaSpec2::M),
    ];
    let mut lines = Vec::new();
    for (name, c12, c13, c23) in &triples {
        let r = improvement_report(c12, c13, c23, g, &q).map_err(err)?;
        let sandwich = r.records.iter().all(|x| x.fl <= x.cl + 1e-6 && x.cu <= x.fu + 1e-6);
        check(sandwich, format!("{name}: sandwich violated"))?;
        lines.push((*name, r.max_gap_lower, r.max_gap_upper));
    }
    let (_, pl, pu) = lines[0];
    check(pl.max(pu) < 1e-6, format!("(Π,Π,Π) gaps {pl:.1e}/{pu:.1e}"))?;
    let (_, fl, fu) = lines[1];
    check(
        fl.max(fu) > 1e-4 && (fl - FGM_TRIPLE_GAP).abs() < 1e-6,
        format!("(FGM(1),Π,Π) gaps {fl:.6}/{fu:.6}"),
    )?;
    Ok(lines
        .iter()
        .map(|(n, l, u)| format!("{n} gaps {l:.2e}/{u:.2e}"))
        .collect::<Vec<_>>()
        .join(", "))
}

fn criterion_8() -> Outcome {
    let start = Instant::now();
    let l = LiftedCopula3::constant(CopulaSpec2::Pi, CopulaSpec2::Pi, CopulaSpec2::M).unwrap();
    let e = sample_lift(&l, 100_000, 20_240_601).map_err(err)?.empirical();
    let sup = empirical_vs_analytic(&l, &e, GridSpec::new(11).unwrap()).map_err(err)?;

    let ex = LiftedCopula3::constant(fgm1(), CopulaSpec2::Pi, CopulaSpec2::M).unwrap();
    let e41 = sample_lift(&ex, 100_000, 7).map_err(err)?.empirical();
    let m13 = e41.eval([0.5, 1.0, 0.5]);
    let elapsed = start.elapsed();

    let detail = format!("sup distance {:.4} at {:?}; 13-marginal {m13:.4}", sup.sup, sup.at);
    check(sup.sup < 0.02 && (m13 - 7.0 / 16.0).abs() <= 0.005, detail.clone())?;
    within(elapsed, Duration::from_secs(60), detail)
}

/// Midpoint rule with `n` panels on `[0,1]`.
fn midpoint(f: impl Fn(f64) -> f64, n: usize) -> f64 {
    let h = 1.0 / n as f64;
    (0..n).map(|i| f((i as f64 + 0.5) * h)).sum::<f64>() * h
}

fn criterion_9() -> Outcome {
    use rand::{Rng, SeedableRng};
    const PANELS: usize = 1_000_000;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
    let q = quad();
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let smooth = |rng: &mut rand_chacha::ChaCha8Rng| match rng.gen_range(0..3) {
            0 => CopulaSpec2::Pi,
            1 => CopulaSpec2::fgm(rng.gen_range(-1.0..=1.0)).unwrap(),
            _ => clayton(rng.gen_range(0.2..8.0)),
        };
        let a = smooth(&mut rng);
        let b = smooth(&mut rng);
        let fam = match rng.gen_range(0..4) {
            0 => constant(families()[rng.gen_range(0..3)].clone()),
            1 => constant(CopulaSpec2::fgm(rng.gen_range(-1.0..=1.0)).unwrap()),
            2 => constant(clayton(rng.gen_range(0.2..8.0))),
            _ => {
                // breakpoints on panel edges so the midpoint rule sees no jump inside a panel
                let mut cuts = [rng.gen_range(1..PANELS / 2), rng.gen_range(PANELS / 2..PANELS)];
                cuts.sort();
                let bp = cuts.map(|k| k as f64 / PANELS as f64);
                FamilyPath::new(vec![0.0, bp[0], bp[1], 1.0], families().to_vec()).unwrap()
            }
        };
        let (u1, u3) = (rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0));
        let got = c_product(&a, &b, &fam, u1, u3, &q).map_err(err)?;
        let oracle = midpoint(|t| integrand(&a, &b, &fam, u1, u3, t), PANELS);
        worst = worst.max((got - oracle).abs());
    }
    check(worst <= 1e-6, format!("20 random products, max |quadrature - midpoint| {worst:.1e}"))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("worked product 7/16", criterion_1),
        ("incompatibility refutations", criterion_2),
        ("marginal identities", criterion_3),
        ("unit law A * M = A", criterion_4),
        ("3-increasingness", criterion_5),
        ("concordance monotonicity", criterion_6),
        ("bound improvement", criterion_7),
        ("Monte Carlo consistency", criterion_8),
        ("quadrature oracle", criterion_9),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("criterion {}: PASS  {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {}: FAIL  {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {}/{} passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
