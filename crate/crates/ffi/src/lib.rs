//! C ABI for the certification engine.
//!
//! Handles are opaque pointers created and freed by this library; every
//! fallible call returns an [`AircertStatus`] and records a thread-local
//! message retrievable with [`aircert_last_error_message`]. Strings returned
//! through out-pointers are owned by the caller and must be released with
//! [`aircert_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, c_double, c_int, CStr, CString};
use std::path::Path;
use std::ptr;

use aircert::report::resolve_clock;
use aircert::scoring::ConfidenceBand;
use aircert::{
    build_assurance_profile, parse_classification, parse_evidence_bundle,
    required_validation_level, render_profile, AssuranceProfile, CheckConfig, EvidenceBundle,
    RenderFormat, VerdictKind, WeightRegistry,
};

/// Status code returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AircertStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// Input could not be parsed.
    ParseError = 3,
    /// Input parsed but violated a schema invariant.
    SchemaViolation = 4,
    /// Stored bundle checksum did not match the recomputed one.
    ChecksumMismatch = 5,
    /// Weight registry lookup or validation failed.
    RegistryError = 6,
    /// Scoring failed (missing activities, bad weights, ...).
    ScoringError = 7,
    /// A check precondition failed.
    CheckError = 8,
    /// File could not be read.
    IoError = 9,
    InternalError = 10,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(status: AircertStatus, message: impl std::fmt::Display) -> AircertStatus {
    let text = CString::new(message.to_string().replace('\0', " "))
        .unwrap_or_else(|_| CString::new("error message unavailable").unwrap());
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(text));
    status
}

fn clear_error() {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
}

/// Opaque handle to a loaded, validated evidence bundle.
pub struct AircertBundle {
    inner: EvidenceBundle,
}

/// Opaque handle to a built assurance profile.
pub struct AircertProfile {
    inner: AssuranceProfile,
}

fn ingest_status(e: &aircert::IngestError) -> AircertStatus {
    use aircert::IngestError::*;
    match e {
        Io(_) => AircertStatus::IoError,
        Parse { .. } => AircertStatus::ParseError,
        SchemaViolation { .. } => AircertStatus::SchemaViolation,
        ChecksumMismatch { .. } => AircertStatus::ChecksumMismatch,
    }
}

fn report_status(e: &aircert::ReportError) -> AircertStatus {
    use aircert::ReportError::*;
    match e {
        Classification(_) => AircertStatus::ParseError,
        Registry(_) => AircertStatus::RegistryError,
        Check(_) => AircertStatus::CheckError,
        Scoring(_) => AircertStatus::ScoringError,
        BadClock(_) => AircertStatus::ParseError,
    }
}

/// # Safety
/// `s` must be null or a valid NUL-terminated string.
unsafe fn utf8_arg<'a>(s: *const c_char) -> Result<Option<&'a str>, AircertStatus> {
    if s.is_null() {
        return Ok(None);
    }
    unsafe { CStr::from_ptr(s) }
        .to_str()
        .map(Some)
        .map_err(|e| set_error(AircertStatus::InvalidUtf8, e))
}

fn string_out(out: *mut *mut c_char, content: String) -> AircertStatus {
    match CString::new(content) {
        Ok(c) => {
            unsafe { *out = c.into_raw() };
            AircertStatus::Ok
        }
        Err(e) => set_error(AircertStatus::InternalError, e),
    }
}

/// Engine version as a static string; never freed by the caller.
#[no_mangle]
pub extern "C" fn aircert_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Message describing the most recent error on this thread, or null.
/// The caller owns the returned string (free with `aircert_string_free`).
#[no_mangle]
pub extern "C" fn aircert_last_error_message() -> *mut c_char {
    LAST_ERROR.with(|slot| match &*slot.borrow() {
        Some(message) => message.clone().into_raw(),
        None => ptr::null_mut(),
    })
}

/// Frees a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must have been returned by this library and not freed before.
#[no_mangle]
pub unsafe extern "C" fn aircert_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(unsafe { CString::from_raw(s) });
    }
}

/// Parses a classification triple like `D/2A/3`. On success writes the
/// required validation level (1-3) through `out_validation_level`.
///
/// # Safety
/// `triple` must be a valid NUL-terminated string; `out_validation_level`
/// must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn aircert_classify(
    triple: *const c_char,
    out_validation_level: *mut c_int,
) -> AircertStatus {
    clear_error();
    if triple.is_null() || out_validation_level.is_null() {
        return set_error(AircertStatus::NullArgument, "triple and out pointer are required");
    }
    let text = match unsafe { utf8_arg(triple) } {
        Ok(Some(t)) => t,
        Ok(None) => unreachable!("null checked above"),
        Err(status) => return status,
    };
    match parse_classification(text) {
        Ok(c) => {
            let level = match required_validation_level(&c) {
                aircert::ValidationLevel::V1 => 1,
                aircert::ValidationLevel::V2 => 2,
                aircert::ValidationLevel::V3 => 3,
            };
            unsafe { *out_validation_level = level };
            AircertStatus::Ok
        }
        Err(e) => set_error(AircertStatus::ParseError, e),
    }
}

/// Parses and validates an evidence bundle from JSON text.
///
/// # Safety
/// `json` must be a valid NUL-terminated string; `out` must be a valid
/// pointer. On success `*out` owns the bundle until `aircert_bundle_free`.
#[no_mangle]
pub unsafe extern "C" fn aircert_bundle_parse_json(
    json: *const c_char,
    out: *mut *mut AircertBundle,
) -> AircertStatus {
    clear_error();
    if json.is_null() || out.is_null() {
        return set_error(AircertStatus::NullArgument, "json and out pointer are required");
    }
    let text = match unsafe { utf8_arg(json) } {
        Ok(Some(t)) => t,
        Ok(None) => unreachable!("null checked above"),
        Err(status) => return status,
    };
    match parse_evidence_bundle(text) {
        Ok(bundle) => {
            unsafe { *out = Box::into_raw(Box::new(AircertBundle { inner: bundle })) };
            AircertStatus::Ok
        }
        Err(e) => set_error(ingest_status(&e), e),
    }
}

/// Loads and validates an evidence bundle from a file path.
///
/// # Safety
/// `path` must be a valid NUL-terminated string; `out` must be a valid
/// pointer. On success `*out` owns the bundle until `aircert_bundle_free`.
#[no_mangle]
pub unsafe extern "C" fn aircert_bundle_load_file(
    path: *const c_char,
    out: *mut *mut AircertBundle,
) -> AircertStatus {
    clear_error();
    if path.is_null() || out.is_null() {
        return set_error(AircertStatus::NullArgument, "path and out pointer are required");
    }
    let text = match unsafe { utf8_arg(path) } {
        Ok(Some(t)) => t,
        Ok(None) => unreachable!("null checked above"),
        Err(status) => return status,
    };
    match aircert::load_evidence_bundle(Path::new(text)) {
        Ok(bundle) => {
            unsafe { *out = Box::into_raw(Box::new(AircertBundle { inner: bundle })) };
            AircertStatus::Ok
        }
        Err(e) => set_error(ingest_status(&e), e),
    }
}

/// Frees a bundle handle. Null is ignored.
///
/// # Safety
/// `bundle` must have been returned by this library and not freed before.
#[no_mangle]
pub unsafe extern "C" fn aircert_bundle_free(bundle: *mut AircertBundle) {
    if !bundle.is_null() {
        drop(unsafe { Box::from_raw(bundle) });
    }
}

/// Builds the assurance profile for a bundle.
///
/// `weights_json` and `config_json` may be null for the built-in registry and
/// default configuration. `fixed_clock` (RFC 3339) may be null for the system
/// clock (the AIRCERT_FIXED_CLOCK environment variable still applies).
///
/// # Safety
/// `bundle` must be a live handle from this library; string arguments must be
/// null or valid NUL-terminated strings; `out` must be a valid pointer. On
/// success `*out` owns the profile until `aircert_profile_free`.
#[no_mangle]
pub unsafe extern "C" fn aircert_certify(
    bundle: *const AircertBundle,
    weights_json: *const c_char,
    config_json: *const c_char,
    fixed_clock: *const c_char,
    out: *mut *mut AircertProfile,
) -> AircertStatus {
    clear_error();
    if bundle.is_null() || out.is_null() {
        return set_error(AircertStatus::NullArgument, "bundle and out pointer are required");
    }
    let bundle = unsafe { &(*bundle).inner };

    let registry = match unsafe { utf8_arg(weights_json) } {
        Ok(Some(text)) => match WeightRegistry::from_json(text) {
            Ok(r) => r,
            Err(e) => return set_error(AircertStatus::RegistryError, e),
        },
        Ok(None) => WeightRegistry::builtin(),
        Err(status) => return status,
    };
    let config = match unsafe { utf8_arg(config_json) } {
        Ok(Some(text)) => match CheckConfig::from_json(text) {
            Ok(c) => c,
            Err(e) => return set_error(AircertStatus::ParseError, e),
        },
        Ok(None) => CheckConfig::default(),
        Err(status) => return status,
    };
    let now = match unsafe { utf8_arg(fixed_clock) } {
        Ok(clock) => match resolve_clock(clock) {
            Ok(now) => now,
            Err(e) => return set_error(AircertStatus::ParseError, e),
        },
        Err(status) => return status,
    };

    match build_assurance_profile(bundle, &registry, &config, now) {
        Ok(profile) => {
            unsafe { *out = Box::into_raw(Box::new(AircertProfile { inner: profile })) };
            AircertStatus::Ok
        }
        Err(e) => set_error(report_status(&e), e),
    }
}

/// Frees a profile handle. Null is ignored.
///
/// # Safety
/// `profile` must have been returned by this library and not freed before.
#[no_mangle]
pub unsafe extern "C" fn aircert_profile_free(profile: *mut AircertProfile) {
    if !profile.is_null() {
        drop(unsafe { Box::from_raw(profile) });
    }
}

/// Final certification score in [0, 100], or -1.0 for a null handle.
///
/// # Safety
/// `profile` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn aircert_profile_final_score(profile: *const AircertProfile) -> c_double {
    if profile.is_null() {
        return -1.0;
    }
    unsafe { &(*profile).inner }.final_score.value
}

/// Verdict: 0 not certified, 1 certified with moderate confidence,
/// 2 certified with high confidence; -1 for a null handle.
///
/// # Safety
/// `profile` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn aircert_profile_verdict(profile: *const AircertProfile) -> c_int {
    if profile.is_null() {
        return -1;
    }
    match unsafe { &(*profile).inner }.final_score.verdict.verdict {
        VerdictKind::NotCertified => 0,
        VerdictKind::CertifiedModerate => 1,
        VerdictKind::CertifiedHigh => 2,
    }
}

/// Confidence band: 0 insufficient, 1 limited, 2 moderate, 3 strong,
/// 4 optimal; -1 for a null handle.
///
/// # Safety
/// `profile` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn aircert_profile_band(profile: *const AircertProfile) -> c_int {
    if profile.is_null() {
        return -1;
    }
    match unsafe { &(*profile).inner }.final_score.band {
        ConfidenceBand::Insufficient => 0,
        ConfidenceBand::Limited => 1,
        ConfidenceBand::Moderate => 2,
        ConfidenceBand::Strong => 3,
        ConfidenceBand::Optimal => 4,
    }
}

/// Renders the profile as canonical JSON into a caller-owned string.
///
/// # Safety
/// `profile` must be a live handle from this library; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn aircert_profile_render_json(
    profile: *const AircertProfile,
    out: *mut *mut c_char,
) -> AircertStatus {
    clear_error();
    if profile.is_null() || out.is_null() {
        return set_error(AircertStatus::NullArgument, "profile and out pointer are required");
    }
    string_out(out, render_profile(unsafe { &(*profile).inner }, RenderFormat::Json))
}

/// Renders the profile as Markdown into a caller-owned string.
///
/// # Safety
/// `profile` must be a live handle from this library; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn aircert_profile_render_markdown(
    profile: *const AircertProfile,
    out: *mut *mut c_char,
) -> AircertStatus {
    clear_error();
    if profile.is_null() || out.is_null() {
        return set_error(AircertStatus::NullArgument, "profile and out pointer are required");
    }
    string_out(out, render_profile(unsafe { &(*profile).inner }, RenderFormat::Markdown))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixture(name: &str) -> CString {
        let path = Path::new(env!("CARGO_MANIFEST_DIR"))
            .join("../core/fixtures")
            .join(name);
        CString::new(path.to_str().unwrap()).unwrap()
    }

    #[test]
    fn version_is_exposed() {
        let v = unsafe { CStr::from_ptr(aircert_version()) };
        assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
    }

    #[test]
    fn certify_reference_fixture_through_the_c_surface() {
        let path = fixture("table1_bundle.json");
        let mut bundle: *mut AircertBundle = ptr::null_mut();
        let status = unsafe { aircert_bundle_load_file(path.as_ptr(), &mut bundle) };
        assert_eq!(status, AircertStatus::Ok);
        assert!(!bundle.is_null());

        let clock = CString::new("2026-01-15T12:00:00Z").unwrap();
        let mut profile: *mut AircertProfile = ptr::null_mut();
        let status = unsafe {
            aircert_certify(bundle, ptr::null(), ptr::null(), clock.as_ptr(), &mut profile)
        };
        assert_eq!(status, AircertStatus::Ok);

        let score = unsafe { aircert_profile_final_score(profile) };
        assert_eq!(score, 74.7);
        assert_eq!(unsafe { aircert_profile_verdict(profile) }, 1);
        assert_eq!(unsafe { aircert_profile_band(profile) }, 2);

        let mut json: *mut c_char = ptr::null_mut();
        assert_eq!(
            unsafe { aircert_profile_render_json(profile, &mut json) },
            AircertStatus::Ok
        );
        let text = unsafe { CStr::from_ptr(json) }.to_str().unwrap();
        let parsed: serde_json::Value = serde_json::from_str(text).unwrap();
        assert_eq!(parsed["final"]["value"], 74.7);
        unsafe { aircert_string_free(json) };

        let mut markdown: *mut c_char = ptr::null_mut();
        assert_eq!(
            unsafe { aircert_profile_render_markdown(profile, &mut markdown) },
            AircertStatus::Ok
        );
        let text = unsafe { CStr::from_ptr(markdown) }.to_str().unwrap();
        assert!(text.contains("**74.7**"));
        unsafe { aircert_string_free(markdown) };

        unsafe {
            aircert_profile_free(profile);
            aircert_bundle_free(bundle);
        }
    }

    #[test]
    fn null_arguments_are_reported() {
        let mut out: *mut AircertBundle = ptr::null_mut();
        let status = unsafe { aircert_bundle_parse_json(ptr::null(), &mut out) };
        assert_eq!(status, AircertStatus::NullArgument);
        let message = aircert_last_error_message();
        assert!(!message.is_null());
        unsafe { aircert_string_free(message) };
    }

    #[test]
    fn parse_errors_carry_messages() {
        let junk = CString::new("{not json").unwrap();
        let mut out: *mut AircertBundle = ptr::null_mut();
        let status = unsafe { aircert_bundle_parse_json(junk.as_ptr(), &mut out) };
        assert_eq!(status, AircertStatus::ParseError);
        let message = aircert_last_error_message();
        let text = unsafe { CStr::from_ptr(message) }.to_str().unwrap().to_string();
        assert!(text.contains("parse"), "{text}");
        unsafe { aircert_string_free(message) };
    }

    #[test]
    fn classify_maps_levels() {
        let triple = CString::new("D/2A/3").unwrap();
        let mut level: c_int = 0;
        assert_eq!(
            unsafe { aircert_classify(triple.as_ptr(), &mut level) },
            AircertStatus::Ok
        );
        assert_eq!(level, 3);

        let bad = CString::new("F/2A/3").unwrap();
        assert_eq!(
            unsafe { aircert_classify(bad.as_ptr(), &mut level) },
            AircertStatus::ParseError
        );
    }

    #[test]
    fn frees_ignore_null() {
        unsafe {
            aircert_bundle_free(ptr::null_mut());
            aircert_profile_free(ptr::null_mut());
            aircert_string_free(ptr::null_mut());
        }
    }
}
