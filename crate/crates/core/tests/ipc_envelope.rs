use critwalk::harness::experiments::try_replicate_map;
use critwalk::harness::stats::ks_one_sample;
use critwalk::infinite::{estimate_backbone, invade};
use critwalk::rng::SeedStream;

/// `k (2 M_{ceil(k t)} - 1)` over 500 runs of a million invaded vertices,
/// trimmed to half the depth, against `Exp(t)`. The trimmed prefix is long
/// enough that the forward maxima near its end are still far from their
/// limit, so the distance comes out at 0.29 (t = 0.5) and 0.59 (t = 1) at seed 1;
/// the README discusses this.
#[test]
#[ignore = "KS is 0.29 and 0.59 at this trim; the documented bias makes 0.05 unattainable"]
fn envelope_law_at_half_trim() {
    let stream = SeedStream::new(1, "envelope-half-trim");
    let ts = [0.5, 1.0];
    let stats = try_replicate_map(&stream, 500, |_, rng| {
        let est = estimate_backbone(&invade(1_000_000, rng)?, 0.5)?;
        ts.iter()
            .map(|&t| est.envelope_statistic(t))
            .collect::<critwalk::Result<Vec<f64>>>()
    })
    .unwrap();
    let ks: Vec<f64> = ts
        .iter()
        .enumerate()
        .map(|(j, &t)| {
            let xs: Vec<f64> = stats.iter().map(|s| s[j]).collect();
            let r = ks_one_sample(&xs, |x| if x <= 0.0 { 0.0 } else { 1.0 - (-t * x).exp() }).unwrap();
            println!("t={t}: KS {:.4} (p {:.3})", r.distance, r.p_value);
            r.distance
        })
        .collect();
    assert!(ks.iter().all(|&d| d < 0.05), "KS {ks:?}");
}
