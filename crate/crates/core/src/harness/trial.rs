//! One Monte Carlo trial of the full pipeline.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::{ExperimentConfig, Orthogonality};
use crate::adaptation::{
    ber_awgn, block_success, code_symbol_error, dbm_to_watts, relay_snr, remap_modulation, select_for_goodput, throughput, AdaptationDecision, CodeMode,
    CombinedSnr,
};
use crate::channel::{
    build_correlation, cascaded_coefficient, optimize_phases, sample_realization, ChannelRealization,
    CorrelationMatrix, RicianParams, RisLinkConfig,
};
use crate::error::{Error, Result};
use crate::jammer::{
    array_receive_sources, jammer_transform, superpose, JammerModel, JammerSpec, PathTopology, ReceiveArray,
};
use crate::receiver::{
    classify_with_pilot, cross_correlate, detect_jamming, equalize, estimate_aoa, estimate_delay_in,
    estimate_jam_gain, estimate_onset, ls_gain, partition_temporal, separate_spatial,
    similarity_ratio, update_cycle, CycleTracker, JammerClass,
};
use crate::waveform::{pilot_inversions, pilot_symbols, Frame, FramePlan, ModScheme, PILOT_LEN};

const REFERENCE_DRAWS: usize = 4000;
const REFERENCE_SEED: u64 = 0x0052_4546_4741_494e;
/// Half-width of the envelope search around an energy onset.
const ONSET_WINDOW: i64 = 16;
/// A replica peak must clear the RMS correlation floor by this factor; the
/// largest of a few thousand noise lags rarely exceeds 3×.
const PEAK_TO_FLOOR: f64 = 5.0;

/// Per-sweep constants shared by every trial.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub cfg: ExperimentConfig,
    pub mode: CodeMode,
    pub source_power_w: f64,
    /// Mean optimised cascade power `E|h_L|²` at the reference RIS size.
    pub reference_gain: f64,
    pub noise_var: f64,
    pub rician: RicianParams,
    links: Vec<(RisLinkConfig, CorrelationMatrix)>,
}

/// Mean of `|h_L|²` with optimised phases over a fixed set of draws.
pub fn mean_cascade_power(link: &RisLinkConfig, rician: &RicianParams) -> Result<f64> {
    let r = build_correlation(link)?;
    let mut rng = ChaCha8Rng::seed_from_u64(REFERENCE_SEED);
    let mut acc = 0.0;
    for _ in 0..REFERENCE_DRAWS {
        let ch = sample_realization(link, rician, &mut rng)?;
        let phi = optimize_phases(&ch.h_sr, &ch.h_rd, &r)?;
        acc += cascaded_coefficient(&ch.h_sr, &ch.h_rd, &r, &phi)?.norm_sqr();
    }
    Ok(acc / REFERENCE_DRAWS as f64)
}

impl Prepared {
    pub fn new(cfg: &ExperimentConfig) -> Result<Self> {
        cfg.validate()?;
        let rician = cfg.jammer.rician();
        let reference = cfg.channel.link(cfg.reference_ris_size());
        let reference_gain = mean_cascade_power(&reference, &rician)?;
        let source_power_w = dbm_to_watts(cfg.experiment.source_power_dbm);
        let noise_var = source_power_w * reference_gain / 10f64.powf(cfg.experiment.baseline_snr_db / 10.0);
        let links = cfg
            .experiment
            .ris_sizes
            .iter()
            .map(|&m| {
                let link = cfg.channel.link(m);
                build_correlation(&link).map(|r| (link, r))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { mode: cfg.adaptation.mode()?, cfg: cfg.clone(), source_power_w, reference_gain, noise_var, rician, links })
    }

    fn decide(&self, family: crate::waveform::ModFamily, ber: impl Fn(&ModScheme) -> f64) -> Result<AdaptationDecision> {
        select_for_goodput(family, ber, &self.mode, self.cfg.adaptation.delta, self.cfg.adaptation.max_order)
    }

    /// Goodput: nominal throughput times the chance that a block survives
    /// the code-symbol error rate `ser` the link actually sees.
    fn goodput(&self, d: &AdaptationDecision, fraction: f64, ser: f64) -> Result<f64> {
        let nominal = throughput(self.cfg.experiment.bandwidth_hz, d.code.rate(), &d.scheme, fraction)?;
        Ok(nominal * block_success(&d.code, ser))
    }
}

/// Outcome of one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    pub t_baseline: f64,
    pub t_jammed: f64,
    pub detected: bool,
    pub class: Option<JammerClass>,
    pub tau_hat: Option<i64>,
    pub tau_true: i64,
    pub scheme: ModScheme,
    pub code_rate: f64,
    pub payload_fraction: f64,
}

/// Complex link gains of one trial, amplitudes including transmit power.
struct Links {
    legit: Complex64,
    eaves: Complex64,
}

struct Emitter<'a> {
    prep: &'a Prepared,
    links: Links,
    spec: JammerSpec,
    relay_gain: Complex64,
}

impl Emitter<'_> {
    /// Legitimate and jammer contributions at the receiver, noise-free
    /// apart from the relay noise the jammer forwards.
    fn components<R: Rng + ?Sized>(&self, x: &[Complex64], rng: &mut R) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
        let sigma2 = self.prep.noise_var;
        let heard = superpose(self.links.eaves, x, Complex64::new(0.0, 0.0), &[], sigma2, rng);
        let replay = jammer_transform(&self.spec, &heard, rng)?;
        let legit: Vec<Complex64> = x.iter().map(|s| s * self.links.legit).collect();
        let jam: Vec<Complex64> = replay.iter().map(|s| s * self.relay_gain).collect();
        Ok((legit, jam))
    }

    fn single<R: Rng + ?Sized>(&self, x: &[Complex64], rng: &mut R) -> Result<Vec<Complex64>> {
        let (legit, jam) = self.components(x, rng)?;
        let one = Complex64::new(1.0, 0.0);
        Ok(superpose(one, &legit, one, &jam, self.prep.noise_var, rng))
    }
}

fn slice_padded(y: &[Complex64], start: usize, len: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); len];
    if start < y.len() {
        let end = (start + len).min(y.len());
        out[..end - start].copy_from_slice(&y[start..end]);
    }
    out
}

/// Correlates the pilot's energy pattern against the received envelope to
/// pin the replica start near a coarse onset. Sign flips and per-symbol
/// scaling keep the pilot magnitudes recognisable where the raw waveform
/// no longer correlates.
fn refine_onset(y: &[Complex64], onset: usize, frame_len: usize) -> usize {
    let pilot = pilot_symbols();
    let mut pattern = vec![Complex64::new(0.0, 0.0); frame_len];
    for (p, v) in pattern.iter_mut().zip(pilot) {
        *p = Complex64::new(v.norm_sqr() - 1.0, 0.0);
    }
    let mean = y.iter().map(|v| v.norm_sqr()).sum::<f64>() / y.len() as f64;
    let env: Vec<Complex64> = y.iter().map(|v| Complex64::new(v.norm_sqr() - mean, 0.0)).collect();
    let gamma = (onset as i64 + ONSET_WINDOW).min(frame_len as i64 - 1) as usize;
    let lo = (onset as i64 - ONSET_WINDOW).max(1);
    let hi = onset as i64 + ONSET_WINDOW;
    cross_correlate(&pattern, &env, frame_len, gamma)
        .and_then(|c| estimate_delay_in(&c, lo, hi))
        .map(|t| t as usize)
        .unwrap_or(onset)
}

/// Secondary correlation peak in `[1, γmax]` that reaches `ratio` of the
/// direct-path peak.
fn secondary_peak(prep: &Prepared, reference: &[Complex64], y: &[Complex64]) -> Result<Option<i64>> {
    let gamma = prep.cfg.gamma_max();
    let corr = cross_correlate(reference, y, prep.cfg.experiment.frame_len, gamma)?;
    let direct = corr.at(0).map(|v| v.norm()).unwrap_or(0.0);
    let Ok(tau) = estimate_delay_in(&corr, 1, gamma as i64) else {
        return Ok(None);
    };
    let peak = corr.at(tau).map(|v| v.norm()).unwrap_or(0.0);
    let floor = {
        let lags: Vec<f64> = (1..=gamma as i64).filter_map(|l| corr.at(l)).map(|v| v.norm_sqr()).collect();
        (lags.iter().sum::<f64>() / lags.len().max(1) as f64).sqrt()
    };
    let clear = peak >= PEAK_TO_FLOOR * floor;
    Ok((direct > 0.0 && clear && peak / direct >= prep.cfg.receiver.peak_ratio_threshold).then_some(tau))
}

/// Looks for the replica in a failed frame: a coherent correlation peak
/// away from lag 0, then the same on squared samples (blind to sign
/// flips), then an energy onset.
fn find_echo(prep: &Prepared, y: &[Complex64], reference: &[Complex64]) -> Result<Option<i64>> {
    if let Some(tau) = secondary_peak(prep, reference, y)? {
        return Ok(Some(tau));
    }
    let sq = |v: &[Complex64]| -> Vec<Complex64> { v.iter().map(|s| s * s).collect() };
    if let Some(tau) = secondary_peak(prep, &sq(reference), &sq(y))? {
        return Ok(Some(tau));
    }
    let f = prep.cfg.experiment.frame_len;
    Ok(estimate_onset(&y[..f], prep.cfg.receiver.onset_threshold).map(|k| refine_onset(y, k, f) as i64))
}

struct Streams {
    legit: Vec<Complex64>,
    jam: Vec<Complex64>,
    plan: FramePlan,
    payload_fraction: f64,
}

fn classify(prep: &Prepared, s: &Streams) -> Result<JammerClass> {
    let n = s.plan.frame_len;
    let h = ls_gain(&s.legit[..PILOT_LEN], pilot_symbols());
    let (_, reference) = s.plan.decode_with_reference(&equalize(&s.legit, h))?;
    // every reliable symbol sharpens the gain estimate; the pilot alone
    // fixes its sign, which the inversion test depends on
    let (jam_known, ref_known) = reference.masked(&s.jam);
    let mut g = estimate_jam_gain(&jam_known, &ref_known);
    if (ls_gain(&s.jam[..PILOT_LEN], pilot_symbols()) * g.conj()).re < 0.0 {
        g = -g;
    }
    let jam = equalize(&s.jam, g);
    let jam_known = equalize(&jam_known, g);
    let metrics = match similarity_ratio(&jam_known, &ref_known, n) {
        Ok(m) => m,
        Err(Error::UndefinedRatio(_)) => return Ok(JammerClass::Unknown),
        Err(e) => return Err(e),
    };
    // sign flips are counted over every reliable symbol, not only the
    // pilot: noise flips a weak replica's sign often enough that 64
    // samples cannot tell a scaled copy from a sign-flipped one
    let (flips, known) = jam_known
        .iter()
        .zip(&ref_known)
        .filter(|(_, r)| r.norm_sqr() > 0.0)
        .fold((0usize, 0usize), |(f, k), (j, r)| (f + ((j * r.conj()).re < 0.0) as usize, k + 1));
    let mut inv = pilot_inversions(&jam[..PILOT_LEN])?;
    inv.phase = flips as f64 / known.max(1) as f64;
    Ok(classify_with_pilot(&metrics, &inv, &prep.cfg.receiver.thresholds()))
}

fn temporal_streams<R: Rng + ?Sized>(
    prep: &Prepared,
    em: &Emitter<'_>,
    baseline: &AdaptationDecision,
    tau_hat: usize,
    tracker: &CycleTracker,
    rng: &mut R,
) -> Result<Option<Streams>> {
    let f = prep.cfg.experiment.frame_len;
    let (burst, fraction) = match prep.cfg.experiment.orthogonality {
        Orthogonality::None => (f / 2, 0.5),
        _ => {
            let s = partition_temporal(f, tau_hat, tracker)?;
            (s.burst_len, s.payload_fraction)
        }
    };
    let Ok(plan) = FramePlan::new(burst, baseline.scheme, baseline.code) else {
        return Ok(None);
    };
    let frame = Frame::build(&plan, rng)?;
    let y = em.single(&frame.symbols, rng)?;
    Ok(Some(Streams {
        legit: y[..burst].to_vec(),
        jam: slice_padded(&y, tau_hat, burst),
        plan,
        payload_fraction: fraction,
    }))
}

/// Runs one trial at `jsr_db` for `jammer` on the `ris_idx`-th RIS size.
pub fn run_trial(prep: &Prepared, jsr_db: f64, jammer: JammerModel, ris_idx: usize, trial_seed: u64) -> Result<TrialResult> {
    let cfg = &prep.cfg;
    let (link, r) = prep
        .links
        .get(ris_idx)
        .ok_or_else(|| Error::Domain(format!("RIS index {ris_idx} out of range")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(trial_seed);
    let ch: ChannelRealization = sample_realization(link, &prep.rician, &mut rng)?;
    let phi = optimize_phases(&ch.h_sr, &ch.h_rd, r)?;
    let sigma2 = prep.noise_var;
    let pt = prep.source_power_w;
    let h_l = cascaded_coefficient(&ch.h_sr, &ch.h_rd, r, &phi)?;
    let s_l = pt * h_l.norm_sqr() / sigma2;

    let baseline = prep.decide(cfg.adaptation.modulation_family, |s| ber_awgn(s, s_l))?;
    let t_baseline = prep.goodput(&baseline, 1.0, code_symbol_error(ber_awgn(&baseline.scheme, s_l)))?;

    let g_ref = prep.reference_gain;
    let g_jam = g_ref * 10f64.powf(cfg.jammer.jam_link_gain_db / 10.0);
    // Both jammers reach the destination over the same draw so the two
    // topologies differ only in what the jammer overhears.
    let jam_link = ch.h_j1 * g_jam.sqrt();
    let eaves = match cfg.experiment.topology {
        PathTopology::SourceAware => {
            let g = g_ref * 10f64.powf(cfg.jammer.src_eaves_gain_db / 10.0);
            ch.h_e1 * (pt * g).sqrt()
        }
        PathTopology::RisAware => cascaded_coefficient(&ch.h_sr, &ch.h_rj, r, &phi)? * pt.sqrt(),
    };
    let p_j = dbm_to_watts(cfg.jammer_power_dbm(jsr_db));
    let gamma_e = eaves.norm_sqr() / sigma2;
    let gamma_j = p_j * jam_link.norm_sqr() / sigma2;
    let s_j = relay_snr(gamma_e, gamma_j);

    let tau_true = cfg.delay_samples();
    let spec = JammerSpec {
        model: jammer,
        amp_gain: cfg.jammer.amp_gain,
        delay_samples: tau_true,
        power_dbm: cfg.jammer_power_dbm(jsr_db),
        cycle_period: cfg.jammer.cycle_period,
    };
    // amplify-and-forward: the replay is normalised to the jammer's power.
    // The overheard phase is folded into the jammer link, whose phase is
    // uniform anyway, so the replica reaching the destination does not
    // depend on the topology beyond its noise.
    let unwind = if eaves.norm() > 0.0 { eaves.conj() / eaves.norm() } else { Complex64::new(1.0, 0.0) };
    let relay_gain = jam_link * unwind * (p_j / ((eaves.norm_sqr() + sigma2) * spec.factor_power())).sqrt();
    let em = Emitter { prep, links: Links { legit: h_l * pt.sqrt(), eaves }, spec, relay_gain };

    let f = cfg.experiment.frame_len;
    let plan = FramePlan::new(f, baseline.scheme, baseline.code)?;
    let frame = Frame::build(&plan, &mut rng)?;
    let spatial = cfg.experiment.orthogonality == Orthogonality::Spatial;
    let (y0, array_streams) = if spatial {
        let (legit, jam) = em.components(&frame.symbols, &mut rng)?;
        let array = ReceiveArray::new(cfg.receiver.antenna_count)?;
        let streams = array_receive_sources(
            &[(&legit, cfg.receiver.legit_aoa_deg.to_radians()), (&jam, cfg.receiver.jammer_aoa_deg.to_radians())],
            &array,
            sigma2,
            &mut rng,
        );
        // before anything is known about the jammer the array simply
        // steers at the legitimate transmitter
        let w = array.steering(cfg.receiver.legit_aoa_deg.to_radians());
        let scale = 1.0 / w.len() as f64;
        let beam = (0..streams[0].len())
            .map(|t| w.iter().zip(&streams).map(|(wi, s)| wi.conj() * s[t]).sum::<Complex64>() * scale)
            .collect();
        (beam, Some(streams))
    } else {
        (em.single(&frame.symbols, &mut rng)?, None)
    };

    let unjammed = |detected: bool, tau_hat: Option<i64>, class: Option<JammerClass>| TrialResult {
        t_baseline,
        t_jammed: t_baseline,
        detected,
        class,
        tau_hat,
        tau_true: tau_true as i64,
        scheme: baseline.scheme,
        code_rate: baseline.code.rate(),
        payload_fraction: 1.0,
    };

    let h_hat = ls_gain(&y0[..PILOT_LEN], pilot_symbols());
    let (decoded, reference) = plan.decode_with_reference(&equalize(&y0[..f], h_hat))?;
    if !detect_jamming(decoded.failed) {
        return Ok(unjammed(false, None, None));
    }
    let scaled_ref: Vec<Complex64> = reference.symbols.iter().map(|v| v * h_hat).collect();
    let Some(tau) = find_echo(prep, &y0, &scaled_ref)? else {
        return Ok(unjammed(false, None, None));
    };
    let tau_hat = tau.max(1) as usize;
    let tracker = update_cycle(CycleTracker::default(), tau_hat as u64);

    let mut streams = None;
    if let Some(array) = &array_streams {
        streams = spatial_streams(prep, array, &plan, tau_hat)?;
    }
    if streams.is_none() {
        streams = temporal_streams(prep, &em, &baseline, tau_hat, &tracker, &mut rng)?;
    }
    let Some(streams) = streams else {
        return Ok(unjammed(true, Some(tau_hat as i64), Some(JammerClass::Unknown)));
    };
    let class = classify(prep, &streams)?;

    // The receiver adapts to the class it believes in; the blocks then
    // meet the error rate of the replica that is really there.
    let family = remap_modulation(class, baseline.scheme).family;
    let believed = CombinedSnr { legit: s_l, replica: s_j, jammer: class.model() };
    let adapted = prep.decide(family, |s| believed.ber(s))?;
    // a remap that the replica cannot pay for is declined and the link
    // stays on its own scheme, ignoring the separated jam stream
    let fraction = streams.payload_fraction;
    let expected = |d: &AdaptationDecision, ber: f64| prep.goodput(d, fraction, code_symbol_error(ber));
    let keep = expected(&baseline, ber_awgn(&baseline.scheme, s_l))? > expected(&adapted, believed.ber(&adapted.scheme))?;
    let (adapted, ser) = if keep {
        (baseline, code_symbol_error(ber_awgn(&baseline.scheme, s_l)))
    } else {
        let actual = CombinedSnr { jammer: Some(jammer), ..believed };
        (adapted, code_symbol_error(actual.ber(&adapted.scheme)))
    };
    let t_jammed = prep.goodput(&adapted, fraction, ser)?;
    Ok(TrialResult {
        t_baseline,
        t_jammed,
        detected: true,
        class: Some(class),
        tau_hat: Some(tau_hat as i64),
        tau_true: tau_true as i64,
        scheme: adapted.scheme,
        code_rate: adapted.code.rate(),
        payload_fraction: fraction,
    })
}

/// MUSIC + LCMV on the array; `None` when the geometry cannot be resolved
/// so the caller can fall back to a temporal split.
fn spatial_streams(prep: &Prepared, array: &[Vec<Complex64>], plan: &FramePlan, tau_hat: usize) -> Result<Option<Streams>> {
    let f = plan.frame_len;
    let angles = match estimate_aoa(array, 2) {
        Ok(a) => a,
        Err(Error::Capability(_)) => return Ok(None),
        Err(e) => return Err(e),
    };
    let expected = prep.cfg.receiver.legit_aoa_deg.to_radians();
    let (li, ji) = if (angles[0] - expected).abs() <= (angles[1] - expected).abs() { (0, 1) } else { (1, 0) };
    let split = match separate_spatial(array, [angles[li], angles[ji]]) {
        Ok(s) => s,
        Err(Error::SeparationFailure(_)) => return Ok(None),
        Err(e) => return Err(e),
    };
    Ok(Some(Streams {
        legit: split.legit[..f].to_vec(),
        jam: slice_padded(&split.jam, tau_hat, f),
        plan: plan.clone(),
        payload_fraction: 1.0,
    }))
}
