//! C ABI over the `txdiv` simulator.
//!
//! Objects are opaque handles created by `*_new` and released by `*_free`.
//! Every fallible call returns a [`TxdivStatus`]; on failure a message is
//! available from [`txdiv_last_error`] on the same thread until the next
//! failing call.

#![allow(clippy::missing_safety_doc, clippy::neg_cmp_op_on_partial_ord)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use txdiv::detect::{self, DetectorKind, LlrMode};
use txdiv::harq::{Ack, ChannelMode, HarqConfig, HarqSession, Stages};
use txdiv::numerics::{CMat, Constellation, Cplx, Modulation, RngStream};
use txdiv::sim::{SimConfig, Simulator};
use txdiv::stbc::SchemeId;
use txdiv::turbo::CodeRate;
use txdiv::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TxdivStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DegenerateChannel = 3,
    Config = 4,
    Protocol = 5,
    Io = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TxdivScheme {
    Cdd = 0,
    AlamoutiCdd = 1,
    Qostbc = 2,
    MdcQostbc = 3,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TxdivRate {
    Half = 0,
    EightNinths = 1,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TxdivModulation {
    Qpsk = 0,
    Qam16 = 1,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TxdivDetector {
    /// LMMSE for QO-STBC, ML otherwise.
    Auto = 0,
    Mld = 1,
    Lmmse = 2,
    MaxLogMld = 3,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TxdivAck {
    Success = 0,
    Fail = 1,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct TxdivComplex {
    pub re: f64,
    pub im: f64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct TxdivRunRecord {
    pub snr_db: f64,
    pub frames: u64,
    pub frame_errors: u64,
    pub bit_errors: u64,
    pub fer: f64,
    pub ber: f64,
    pub fer_ci_lo: f64,
    pub fer_ci_hi: f64,
}

/// Opaque simulation configuration.
pub struct TxdivSimConfig(SimConfig);

/// Opaque HARQ session.
pub struct TxdivHarq(HarqSession);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("NUL removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: TxdivStatus, msg: impl Into<String>) -> TxdivStatus {
    set_error(msg.into());
    status
}

fn from_error(e: Error) -> TxdivStatus {
    let status = match &e {
        Error::InvalidInput(_) => TxdivStatus::InvalidArgument,
        Error::DegenerateChannel(_) => TxdivStatus::DegenerateChannel,
        Error::Config(_) | Error::Json(_) => TxdivStatus::Config,
        Error::Protocol(_) => TxdivStatus::Protocol,
        Error::Io(_) | Error::Csv(_) => TxdivStatus::Io,
    };
    fail(status, e.to_string())
}

fn guard(f: impl FnOnce() -> TxdivStatus) -> TxdivStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => fail(TxdivStatus::Panic, "internal panic"),
    }
}

impl From<TxdivScheme> for SchemeId {
    fn from(s: TxdivScheme) -> Self {
        match s {
            TxdivScheme::Cdd => SchemeId::Cdd,
            TxdivScheme::AlamoutiCdd => SchemeId::AlamoutiCdd,
            TxdivScheme::Qostbc => SchemeId::Qostbc,
            TxdivScheme::MdcQostbc => SchemeId::MdcQostbc,
        }
    }
}

impl From<TxdivRate> for CodeRate {
    fn from(r: TxdivRate) -> Self {
        match r {
            TxdivRate::Half => CodeRate::Half,
            TxdivRate::EightNinths => CodeRate::EightNinths,
        }
    }
}

impl From<TxdivModulation> for Modulation {
    fn from(m: TxdivModulation) -> Self {
        match m {
            TxdivModulation::Qpsk => Modulation::Qpsk,
            TxdivModulation::Qam16 => Modulation::Qam16,
        }
    }
}

/// Message of the last failed call on this thread, or NULL. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn txdiv_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn txdiv_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// New configuration with the reference defaults (4×2, QPSK, TU6, 512
/// subcarriers, 100 errors / 20000 frames) and a single SNR point of 0 dB.
#[no_mangle]
pub unsafe extern "C" fn txdiv_sim_config_new(
    scheme: TxdivScheme,
    rate: TxdivRate,
    out: *mut *mut TxdivSimConfig,
) -> TxdivStatus {
    guard(|| {
        if out.is_null() {
            return fail(TxdivStatus::NullPointer, "out is NULL");
        }
        let cfg = SimConfig::new(scheme.into(), rate.into(), vec![0.0]);
        *out = Box::into_raw(Box::new(TxdivSimConfig(cfg)));
        TxdivStatus::Ok
    })
}

/// Configuration from a JSON document (the format written next to CSV
/// outputs).
#[no_mangle]
pub unsafe extern "C" fn txdiv_sim_config_from_json(
    json: *const c_char,
    out: *mut *mut TxdivSimConfig,
) -> TxdivStatus {
    guard(|| {
        if json.is_null() || out.is_null() {
            return fail(TxdivStatus::NullPointer, "json or out is NULL");
        }
        let Ok(text) = CStr::from_ptr(json).to_str() else {
            return fail(TxdivStatus::InvalidArgument, "json is not UTF-8");
        };
        match serde_json::from_str::<SimConfig>(text) {
            Ok(cfg) => {
                *out = Box::into_raw(Box::new(TxdivSimConfig(cfg)));
                TxdivStatus::Ok
            }
            Err(e) => from_error(e.into()),
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn txdiv_sim_config_free(cfg: *mut TxdivSimConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

unsafe fn with_cfg(cfg: *mut TxdivSimConfig, f: impl FnOnce(&mut SimConfig) -> TxdivStatus) -> TxdivStatus {
    guard(|| match cfg.as_mut() {
        Some(c) => f(&mut c.0),
        None => fail(TxdivStatus::NullPointer, "config handle is NULL"),
    })
}

#[no_mangle]
pub unsafe extern "C" fn txdiv_sim_config_set_stop_rule(
    cfg: *mut TxdivSimConfig,
    min_errors: u64,
    max_frames: u64,
) -> TxdivStatus {
    with_cfg(cfg, |c| {
        if max_frames == 0 {
            return fail(TxdivStatus::InvalidArgument, "max_frames must be positive");
        }
        c.min_errors = min_errors;
        c.max_frames = max_frames;
        TxdivStatus::Ok
    })
}

#[no_mangle]
pub unsafe extern "C" fn txdiv_sim_config_set_seed(cfg: *mut TxdivSimConfig, seed: u64) -> TxdivStatus {
    with_cfg(cfg, |c| {
        c.seed = seed;
        TxdivStatus::Ok
    })
}

#[no_mangle]
pub unsafe extern "C" fn txdiv_sim_config_set_link(
    cfg: *mut TxdivSimConfig,
    nr: usize,
    modulation: TxdivModulation,
    detector: TxdivDetector,
) -> TxdivStatus {
    with_cfg(cfg, |c| {
        if nr == 0 {
            return fail(TxdivStatus::InvalidArgument, "nr must be positive");
        }
        c.nr = nr;
        c.modulation = modulation.into();
        c.detector = match detector {
            TxdivDetector::Auto => None,
            TxdivDetector::Mld => Some(DetectorKind::Mld),
            TxdivDetector::Lmmse => Some(DetectorKind::Lmmse),
            TxdivDetector::MaxLogMld => Some(DetectorKind::MaxLogMld),
        };
        TxdivStatus::Ok
    })
}

/// Configuration as JSON. On success `*out` must be released with
/// [`txdiv_string_free`].
#[no_mangle]
pub unsafe extern "C" fn txdiv_sim_config_to_json(
    cfg: *const TxdivSimConfig,
    out: *mut *mut c_char,
) -> TxdivStatus {
    guard(|| {
        let (Some(c), false) = (cfg.as_ref(), out.is_null()) else {
            return fail(TxdivStatus::NullPointer, "config or out is NULL");
        };
        match serde_json::to_string(&c.0) {
            Ok(s) => {
                *out = CString::new(s).expect("JSON has no NUL").into_raw();
                TxdivStatus::Ok
            }
            Err(e) => from_error(e.into()),
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn txdiv_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Runs one SNR point under the configured stop rule.
#[no_mangle]
pub unsafe extern "C" fn txdiv_run_point(
    cfg: *const TxdivSimConfig,
    snr_db: f64,
    out: *mut TxdivRunRecord,
) -> TxdivStatus {
    guard(|| {
        let (Some(c), false) = (cfg.as_ref(), out.is_null()) else {
            return fail(TxdivStatus::NullPointer, "config or out is NULL");
        };
        if snr_db.is_nan() {
            return fail(TxdivStatus::InvalidArgument, "SNR is NaN");
        }
        let mut sc = c.0.clone();
        sc.snr_db = vec![snr_db];
        let r = match Simulator::new(sc).and_then(|s| s.run_point(snr_db)) {
            Ok(r) => r,
            Err(e) => return from_error(e),
        };
        *out = TxdivRunRecord {
            snr_db: r.snr_db,
            frames: r.frames,
            frame_errors: r.frame_errors,
            bit_errors: r.bit_errors,
            fer: r.fer,
            ber: r.ber,
            fer_ci_lo: r.fer_ci_lo,
            fer_ci_hi: r.fer_ci_hi,
        };
        TxdivStatus::Ok
    })
}

/// Symbolwise ML detection of one MDC-QOSTBC codeword.
///
/// `r` holds `4 * nr` received samples, slot-major (`r[t * nr + rx]`); `h`
/// is the `nr × 4` effective channel, row-major, with the power scaling
/// included. Writes 4 symbols to `symbols` and `4 * log2(M)` LLRs to
/// `llrs`.
#[no_mangle]
pub unsafe extern "C" fn txdiv_mdc_detect(
    r: *const TxdivComplex,
    h: *const TxdivComplex,
    nr: usize,
    noise_variance: f64,
    modulation: TxdivModulation,
    max_log: bool,
    symbols: *mut TxdivComplex,
    llrs: *mut f64,
) -> TxdivStatus {
    guard(|| {
        if r.is_null() || h.is_null() || symbols.is_null() || llrs.is_null() {
            return fail(TxdivStatus::NullPointer, "NULL buffer");
        }
        if nr == 0 || nr > 64 {
            return fail(TxdivStatus::InvalidArgument, "nr out of range");
        }
        if !(noise_variance >= 0.0) {
            return fail(TxdivStatus::InvalidArgument, "noise variance must be non-negative");
        }
        let conv = |p: &TxdivComplex| Cplx::new(p.re, p.im);
        let rv: Vec<Cplx> = std::slice::from_raw_parts(r, 4 * nr).iter().map(conv).collect();
        let hv: Vec<Cplx> = std::slice::from_raw_parts(h, 4 * nr).iter().map(conv).collect();
        let hm = CMat::from_vec(nr, 4, hv).expect("4·nr entries");
        let cons = Constellation::new(modulation.into());
        let mode = if max_log { LlrMode::MaxLog } else { LlrMode::Exact };
        match detect::mdc_mld(&rv, &hm, noise_variance, &cons, mode) {
            Ok(d) => {
                let out = std::slice::from_raw_parts_mut(symbols, 4);
                for (o, s) in out.iter_mut().zip(&d.hard_symbols) {
                    *o = TxdivComplex { re: s.re, im: s.im };
                }
                std::slice::from_raw_parts_mut(llrs, d.llrs.len()).copy_from_slice(&d.llrs);
                TxdivStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Hypotheses per independent ML search (QO-STBC pair `M²`, MDC-QOSTBC
/// `M`, orthogonal schemes `√M`).
#[no_mangle]
pub unsafe extern "C" fn txdiv_search_space(
    scheme: TxdivScheme,
    modulation: TxdivModulation,
    out: *mut u64,
) -> TxdivStatus {
    guard(|| {
        if out.is_null() {
            return fail(TxdivStatus::NullPointer, "out is NULL");
        }
        *out = detect::search_space(scheme.into(), modulation.into()) as u64;
        TxdivStatus::Ok
    })
}

/// New HARQ session carrying one MDC-QOSTBC codeword. `four_stages`
/// sends rows 3 and 4 separately; `independent_channel` redraws the
/// channel for every row.
#[no_mangle]
pub unsafe extern "C" fn txdiv_harq_new(
    nr: usize,
    modulation: TxdivModulation,
    four_stages: bool,
    independent_channel: bool,
    snr_db: f64,
    seed: u64,
    session: u64,
    out: *mut *mut TxdivHarq,
) -> TxdivStatus {
    guard(|| {
        if out.is_null() {
            return fail(TxdivStatus::NullPointer, "out is NULL");
        }
        if snr_db.is_nan() {
            return fail(TxdivStatus::InvalidArgument, "SNR is NaN");
        }
        let cfg = HarqConfig {
            nr,
            modulation: modulation.into(),
            stages: if four_stages { Stages::Four } else { Stages::Three },
            channel_mode: if independent_channel { ChannelMode::Independent } else { ChannelMode::Static },
        };
        match HarqSession::new(&cfg, snr_db, RngStream::new(seed, session)) {
            Ok(s) => {
                *out = Box::into_raw(Box::new(TxdivHarq(s)));
                TxdivStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn txdiv_harq_free(h: *mut TxdivHarq) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Sends the next round; `rows_sent` receives the number of codeword rows
/// in it.
#[no_mangle]
pub unsafe extern "C" fn txdiv_harq_transmit(h: *mut TxdivHarq, rows_sent: *mut usize) -> TxdivStatus {
    guard(|| {
        let (Some(s), false) = (h.as_mut(), rows_sent.is_null()) else {
            return fail(TxdivStatus::NullPointer, "handle or rows_sent is NULL");
        };
        match s.0.transmit_round() {
            Ok(rows) => {
                *rows_sent = rows.len();
                TxdivStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Decodes everything received so far and records the genie ACK.
/// `diversity` receives the transmit diversity level of the accumulated
/// rows (1, 2, 4), or 0 where none is defined.
#[no_mangle]
pub unsafe extern "C" fn txdiv_harq_acknowledge(
    h: *mut TxdivHarq,
    ack: *mut TxdivAck,
    diversity: *mut u32,
) -> TxdivStatus {
    guard(|| {
        let (Some(s), false, false) = (h.as_mut(), ack.is_null(), diversity.is_null()) else {
            return fail(TxdivStatus::NullPointer, "handle or output is NULL");
        };
        match s.0.acknowledge() {
            Ok((d, a)) => {
                *ack = match a {
                    Ack::Success => TxdivAck::Success,
                    Ack::Fail => TxdivAck::Fail,
                };
                *diversity = d.label.transmit_diversity().unwrap_or(0);
                TxdivStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Whether the session ended (ACK received or all rounds used).
#[no_mangle]
pub unsafe extern "C" fn txdiv_harq_finished(h: *const TxdivHarq, finished: *mut bool) -> TxdivStatus {
    guard(|| {
        let (Some(s), false) = (h.as_ref(), finished.is_null()) else {
            return fail(TxdivStatus::NullPointer, "handle or output is NULL");
        };
        *finished = s.0.finished();
        TxdivStatus::Ok
    })
}
