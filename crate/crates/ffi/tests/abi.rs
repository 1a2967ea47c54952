use std::ffi::{CStr, CString};
use std::ptr;

use besselreg_ffi::*;

unsafe fn last_error() -> String {
    let p = br_last_error();
    assert!(!p.is_null());
    CStr::from_ptr(p).to_string_lossy().into_owned()
}

#[test]
fn preset_fit_roundtrip() {
    unsafe {
        let name = CString::new("stress-anxiety").unwrap();
        let mut d = ptr::null_mut();
        assert_eq!(br_dataset_preset(name.as_ptr(), &mut d), BrStatus::Ok);
        let (mut n, mut p, mut q) = (0, 0, 0);
        assert_eq!(br_dataset_dims(d, &mut n, &mut p, &mut q), BrStatus::Ok);
        assert_eq!((n, p, q), (166, 2, 1));

        let mut f = ptr::null_mut();
        assert_eq!(br_fit(d, BrModel::Beta, &mut f), BrStatus::Ok);
        assert_eq!(br_fit_converged(f), 1);
        assert_eq!(br_fit_len(f), 3);
        let mut est = [0.0; 3];
        let mut se = [0.0; 3];
        assert_eq!(br_fit_coefficients(f, est.as_mut_ptr(), se.as_mut_ptr(), 3), BrStatus::Ok);
        assert!((est[1] - 3.752).abs() < 5e-3, "{est:?}");
        assert!(se.iter().all(|s| *s > 0.0));
        assert!(br_fit_loglik(f).is_finite());

        let mut r = vec![0.0; n];
        assert_eq!(br_pearson_residuals(f, d, r.as_mut_ptr(), n), BrStatus::Ok);
        assert!(r.iter().all(|e| e.is_finite()));
        assert_eq!(br_pearson_residuals(f, d, r.as_mut_ptr(), n - 1), BrStatus::InvalidArgument);

        let mut rep = BrDbbResult { mean_sq_response: 0.0, variance_bound_sum: 0.0, d_bessel: 0.0, d_beta: 0.0, decision: BrModel::Beta };
        assert_eq!(br_dbb(d, &mut rep), BrStatus::Ok);
        assert_eq!(rep.decision, BrModel::Bessel);
        assert!((rep.variance_bound_sum - 9.11992).abs() < 1e-4);

        br_fit_free(f);
        br_dataset_free(d);
    }
}

#[test]
fn status_codes_and_messages() {
    unsafe {
        let mut d = ptr::null_mut();
        let bad = CString::new("nope").unwrap();
        assert_eq!(br_dataset_preset(bad.as_ptr(), &mut d), BrStatus::InvalidArgument);
        assert!(last_error().contains("nope"));
        assert!(d.is_null());

        assert_eq!(br_dataset_preset(ptr::null(), &mut d), BrStatus::NullPointer);
        assert_eq!(br_fit(ptr::null(), BrModel::Bessel, &mut ptr::null_mut()), BrStatus::NullPointer);

        let z = [0.2, 1.3, 0.4, 0.5];
        let x = [1.0; 4];
        let v = [1.0; 4];
        assert_eq!(br_dataset_new(z.as_ptr(), 4, x.as_ptr(), 1, v.as_ptr(), 1, &mut d), BrStatus::InvalidData);
        assert!(!last_error().is_empty());

        let x2 = [1.0, 0.5, 1.0, 0.5, 1.0, 0.5, 1.0, 0.5];
        let z2 = [0.2, 0.3, 0.4, 0.5];
        assert_eq!(br_dataset_new(z2.as_ptr(), 4, x2.as_ptr(), 2, v.as_ptr(), 1, &mut d), BrStatus::RankDeficient);

        assert_eq!(br_dataset_new(z2.as_ptr(), 4, x.as_ptr(), 1, v.as_ptr(), 1, &mut d), BrStatus::Ok);
        assert!(br_last_error().is_null());
        br_dataset_free(d);

        br_dataset_free(ptr::null_mut());
        br_fit_free(ptr::null_mut());
        assert_eq!(br_fit_len(ptr::null()), 0);
        assert!(br_fit_loglik(ptr::null()).is_nan());
        assert_eq!(CStr::from_ptr(br_version()).to_str().unwrap(), env!("CARGO_PKG_VERSION"));
    }
}

#[test]
fn header_is_current_and_compiles_from_c() {
    let root = std::path::Path::new(env!("CARGO_MANIFEST_DIR"));
    let header = std::fs::read_to_string(root.join("include/besselreg.h")).unwrap();
    for sym in ["br_dataset_new", "br_dataset_preset", "br_fit", "br_fit_coefficients", "br_dbb", "br_last_error", "BrStatus"] {
        assert!(header.contains(sym), "{sym} missing from header");
    }
    let Ok(cc) = which_cc() else {
        eprintln!("no C compiler found; skipping C compile check");
        return;
    };
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("probe.c");
    std::fs::write(
        &src,
        "#include \"besselreg.h\"\nint main(void) { BrDataset *d = 0; BrStatus s = br_dataset_preset(\"weather-task\", &d);\n\
         br_dataset_free(d); return s == BR_STATUS_OK ? 0 : 1; }\n",
    )
    .unwrap();
    let status = std::process::Command::new(cc)
        .arg("-fsyntax-only")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(root.join("include"))
        .arg(&src)
        .status()
        .unwrap();
    assert!(status.success());
}

fn which_cc() -> Result<&'static str, ()> {
    for cc in ["cc", "gcc", "clang"] {
        if std::process::Command::new(cc).arg("--version").output().is_ok() {
            return Ok(cc);
        }
    }
    Err(())
}
