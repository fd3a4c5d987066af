use std::ffi::{c_char, CStr, CString};
use std::ptr;

use kci_ffi::*;

fn last_error() -> String {
    let p = kci_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn sine(n: usize, amp: f64) -> *mut KciProfile {
    let h = std::f64::consts::PI / (n + 1) as f64;
    let v: Vec<f64> = (1..=n).map(|i| amp * (i as f64 * h).sin()).collect();
    let mut out = ptr::null_mut();
    let st = unsafe { kci_profile_new(v.as_ptr(), n, std::f64::consts::PI, &mut out) };
    assert_eq!(st, KciStatus::Ok);
    out
}

#[test]
fn profile_round_trip_and_norm() {
    let p = sine(63, 2.0);
    unsafe {
        assert_eq!(kci_profile_len(p), 63);
        let mut buf = vec![0.0; 63];
        assert_eq!(kci_profile_values(p, buf.as_mut_ptr(), 63), KciStatus::Ok);
        assert!((buf[31] - 2.0).abs() < 1e-12);
        assert_eq!(
            kci_profile_values(p, buf.as_mut_ptr(), 10),
            KciStatus::Invalid
        );
        let mut h = 0.0;
        assert_eq!(kci_profile_h10_norm_sq(p, &mut h), KciStatus::Ok);
        // ‖(2 sin x)'‖² on (0, π) = 2π
        assert!((h - 2.0 * std::f64::consts::PI).abs() < 1e-10);
        kci_profile_free(p);
        kci_profile_free(ptr::null_mut());
        assert_eq!(kci_profile_len(ptr::null()), 0);
    }
}

#[test]
fn errors_set_status_and_message() {
    let a = CString::new("saturating").unwrap();
    let beta = CString::new("sinusoidal:1,2").unwrap();
    let mut prob = ptr::null_mut();
    let st = unsafe {
        kci_problem_new(
            KciProblemKind::Nonlocal,
            -1.0,
            a.as_ptr(),
            beta.as_ptr(),
            &mut prob,
        )
    };
    assert_eq!(st, KciStatus::Invalid);
    assert!(prob.is_null());
    assert!(last_error().contains("lambda"));

    let st = unsafe {
        kci_problem_new(
            KciProblemKind::Autonomous,
            3.0,
            a.as_ptr(),
            beta.as_ptr(),
            &mut prob,
        )
    };
    assert_eq!(st, KciStatus::Invalid);

    let st = unsafe {
        kci_problem_new(
            KciProblemKind::Nonlocal,
            3.0,
            ptr::null(),
            beta.as_ptr(),
            &mut prob,
        )
    };
    assert_eq!(st, KciStatus::NullPointer);
    assert!(last_error().contains("null"));

    let mut n = 0usize;
    let st = unsafe {
        kci_equilibrium(
            0.5,
            1.0,
            a.as_ptr(),
            1,
            63,
            &mut ptr::null_mut(),
            ptr::null_mut(),
        )
    };
    assert_eq!(st, KciStatus::Invalid);
    let st = unsafe { kci_equilibria_count(3.0, 1.0, a.as_ptr(), 63, ptr::null_mut()) };
    assert_eq!(st, KciStatus::NullPointer);
    let st = unsafe { kci_equilibria_count(4.5, 1.0, a.as_ptr(), 63, &mut n) };
    assert_eq!((st, n), (KciStatus::Ok, 5));
}

#[test]
fn equilibrium_is_stationary_under_evolution() {
    let a = CString::new("saturating").unwrap();
    let beta = CString::new("constant:1").unwrap();
    unsafe {
        let mut eq = ptr::null_mut();
        let mut c = 0.0;
        assert_eq!(
            kci_equilibrium(3.0, 1.0, a.as_ptr(), 1, 127, &mut eq, &mut c),
            KciStatus::Ok
        );
        assert!((1.0..=2.0).contains(&c));
        let mut prob = ptr::null_mut();
        assert_eq!(
            kci_problem_new(
                KciProblemKind::Autonomous,
                3.0,
                a.as_ptr(),
                beta.as_ptr(),
                &mut prob
            ),
            KciStatus::Ok
        );
        let mut later = ptr::null_mut();
        assert_eq!(
            kci_evolve(eq, 0.0, 1.0, prob, 1e-3, &mut later),
            KciStatus::Ok
        );
        let (mut x, mut y) = (vec![0.0; 127], vec![0.0; 127]);
        kci_profile_values(eq, x.as_mut_ptr(), 127);
        kci_profile_values(later, y.as_mut_ptr(), 127);
        let d = x
            .iter()
            .zip(&y)
            .fold(0.0f64, |m, (p, q)| m.max((p - q).abs()));
        assert!(d < 1e-6, "{d}");
        kci_profile_free(later);
        kci_profile_free(eq);
        kci_problem_free(prob);
    }
}

#[test]
fn sandwich_through_the_abi() {
    let a = CString::new("rational").unwrap();
    let beta = CString::new("sinusoidal:1,2").unwrap();
    unsafe {
        let mut prob = ptr::null_mut();
        kci_problem_new(
            KciProblemKind::Nonlocal,
            5.0,
            a.as_ptr(),
            beta.as_ptr(),
            &mut prob,
        );
        let (lo, mid, hi) = (sine(63, 0.1), sine(63, 0.5), sine(63, 1.5));
        let mut v = f64::NAN;
        assert_eq!(
            kci_sandwich_violation(lo, mid, hi, 0.0, 2.0, prob, 1e-3, &mut v),
            KciStatus::Ok
        );
        assert!(v <= 1e-6, "{v}");
        for p in [lo, mid, hi] {
            kci_profile_free(p);
        }
        kci_problem_free(prob);
    }
}

#[test]
fn cli_entry_point_and_version() {
    let args: Vec<CString> = ["kci", "simulate", "--lambda", "-1"]
        .iter()
        .map(|s| CString::new(*s).unwrap())
        .collect();
    let ptrs: Vec<*const c_char> = args.iter().map(|s| s.as_ptr()).collect();
    assert_eq!(unsafe { kci_cli_run(ptrs.len() as i32, ptrs.as_ptr()) }, 1);
    assert_eq!(unsafe { kci_cli_run(0, ptr::null()) }, 1);
    let v = unsafe { CStr::from_ptr(kci_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_is_generated_and_compiles_as_c() {
    let header = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("include/kci.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for sym in [
        "kci_last_error",
        "kci_profile_new",
        "kci_profile_free",
        "kci_problem_new",
        "kci_evolve",
        "kci_equilibria_count",
        "kci_sandwich_violation",
        "kci_cli_run",
        "typedef struct KciProfile KciProfile",
        "KCI_STATUS_OK = 0",
    ] {
        assert!(text.contains(sym), "{sym} missing from header");
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("use.c");
    std::fs::write(
        &src,
        "#include \"kci.h\"\nint main(void) { KciProfile *p = 0; kci_profile_free(p); return KCI_STATUS_OK; }\n",
    )
    .unwrap();
    let cc = std::process::Command::new("cc")
        .arg("-fsyntax-only")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(header.parent().unwrap())
        .arg(&src)
        .status()
        .expect("a C compiler is available");
    assert!(cc.success());
}
