use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use cgvf_ffi::*;

const PAIR: &str = include_str!("c/pair.toml");

fn last_error() -> String {
    let len = unsafe { cgvf_last_error_message(ptr::null_mut(), 0) };
    let mut buf = vec![0 as std::ffi::c_char; len.max(1)];
    unsafe { cgvf_last_error_message(buf.as_mut_ptr(), buf.len()) };
    unsafe { CStr::from_ptr(buf.as_ptr()) }.to_string_lossy().into_owned()
}

#[test]
fn torus_eval_and_jacobian() {
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { cgvf_surface_new_torus(6.0, 2.0, &mut s) }, CgvfStatus::Ok);
    assert_eq!(unsafe { cgvf_surface_dim(s) }, 3);
    let mut p = [0.0; 3];
    let st = unsafe { cgvf_surface_eval(s, std::f64::consts::FRAC_PI_2, 0.0, p.as_mut_ptr(), 3) };
    assert_eq!(st, CgvfStatus::Ok);
    assert!((p[0] - 6.0).abs() < 1e-12 && p[1].abs() < 1e-12 && (p[2] - 2.0).abs() < 1e-12);

    let (mut d1, mut d2) = ([0.0; 3], [0.0; 3]);
    let st = unsafe { cgvf_surface_jacobian(s, 0.0, 0.0, d1.as_mut_ptr(), d2.as_mut_ptr(), 3) };
    assert_eq!(st, CgvfStatus::Ok);
    assert_eq!(d1, [0.0, 0.0, 2.0]);
    assert_eq!(d2, [0.0, 8.0, 0.0]);
    unsafe { cgvf_surface_free(s) };
}

#[test]
fn status_codes() {
    let mut p = [0.0; 3];
    assert_eq!(
        unsafe { cgvf_surface_eval(ptr::null(), 0.0, 0.0, p.as_mut_ptr(), 3) },
        CgvfStatus::NullPointer
    );
    assert!(last_error().contains("surface"));

    let mut s = ptr::null_mut();
    assert_eq!(unsafe { cgvf_surface_new_torus(1.0, 2.0, &mut s) }, CgvfStatus::Config);
    assert!(s.is_null());

    assert_eq!(unsafe { cgvf_surface_new_plane(&mut s) }, CgvfStatus::Ok);
    assert_eq!(
        unsafe { cgvf_surface_eval(s, 0.0, 0.0, p.as_mut_ptr(), 2) },
        CgvfStatus::DimensionMismatch
    );
    unsafe { cgvf_surface_free(s) };

    let mut w = 0.0;
    assert_eq!(unsafe { cgvf_repulsion_weight(0.5, 0.4, 0.6, &mut w) }, CgvfStatus::Ok);
    assert_eq!(w, 1.0);
    assert_eq!(last_error(), "");
    assert_eq!(
        unsafe { cgvf_repulsion_weight(0.4, 0.4, 0.6, &mut w) },
        CgvfStatus::SeparationViolation
    );
    assert_eq!(
        unsafe { cgvf_repulsion_weight(0.5, 0.6, 0.4, &mut w) },
        CgvfStatus::InvalidArgument
    );
}

#[test]
fn simulation_round_trip() {
    let text = CString::new(PAIR).unwrap();
    let mut sim = ptr::null_mut();
    assert_eq!(unsafe { cgvf_simulation_from_toml(text.as_ptr(), &mut sim) }, CgvfStatus::Ok);
    assert_eq!(unsafe { cgvf_simulation_robot_count(sim) }, 2);
    assert_eq!(unsafe { cgvf_simulation_dim(sim) }, 3);

    let mut before = CgvfMetrics::default();
    assert_eq!(unsafe { cgvf_simulation_metrics(sim, &mut before) }, CgvfStatus::Ok);
    assert_eq!(unsafe { cgvf_simulation_step(sim, 1000) }, CgvfStatus::Ok);
    assert!((unsafe { cgvf_simulation_time(sim) } - 1.0).abs() < 1e-9);
    let mut after = CgvfMetrics::default();
    assert_eq!(unsafe { cgvf_simulation_metrics(sim, &mut after) }, CgvfStatus::Ok);
    assert!(after.lyapunov < before.lyapunov);
    assert!(after.min_sep > 0.4);

    let (mut x, mut w, mut h) = ([0.0; 3], [0.0; 2], [f64::NAN; 2]);
    let st = unsafe { cgvf_simulation_robot(sim, 1, x.as_mut_ptr(), 3, w.as_mut_ptr(), h.as_mut_ptr()) };
    assert_eq!(st, CgvfStatus::Ok);
    assert!((h[0] + 1.0).abs() < 1e-12 && (h[1] + 1.0).abs() < 1e-12, "{h:?}");
    assert_eq!(
        unsafe { cgvf_simulation_robot(sim, 2, x.as_mut_ptr(), 3, ptr::null_mut(), ptr::null_mut()) },
        CgvfStatus::InvalidArgument
    );
    unsafe { cgvf_simulation_free(sim) };
}

#[test]
fn simulation_errors() {
    let mut sim = ptr::null_mut();
    let bad = CString::new("name = \"x\"\nbogus = 1\n").unwrap();
    assert_eq!(unsafe { cgvf_simulation_from_toml(bad.as_ptr(), &mut sim) }, CgvfStatus::Config);
    assert!(sim.is_null());
    assert!(!last_error().is_empty());

    let missing = CString::new("/nonexistent/scenario.toml").unwrap();
    assert_eq!(unsafe { cgvf_simulation_from_file(missing.as_ptr(), &mut sim) }, CgvfStatus::Io);

    let coarse = CString::new(PAIR.replace("duration = 1.0", "duration = 1.0\ndt = 0.5")).unwrap();
    assert_eq!(unsafe { cgvf_simulation_from_toml(coarse.as_ptr(), &mut sim) }, CgvfStatus::Ok);
    let st = unsafe { cgvf_simulation_step(sim, 20) };
    assert_eq!(st, CgvfStatus::SeparationViolation, "{}", last_error());
    assert!(unsafe { cgvf_simulation_time(sim) }.is_finite());
    unsafe { cgvf_simulation_free(sim) };
}

#[test]
fn scenario_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("pair.toml");
    std::fs::write(&path, PAIR).unwrap();
    let c = CString::new(path.to_str().unwrap()).unwrap();
    let mut sim = ptr::null_mut();
    assert_eq!(unsafe { cgvf_simulation_from_file(c.as_ptr(), &mut sim) }, CgvfStatus::Ok);
    unsafe { cgvf_simulation_free(sim) };
}

fn static_lib() -> Option<PathBuf> {
    let exe = std::env::current_exe().ok()?;
    let deps = exe.parent()?;
    [deps.parent()?.join("libcgvf_ffi.a")]
        .into_iter()
        .chain(
            std::fs::read_dir(deps)
                .ok()?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| {
                    let name = p.file_name().and_then(|n| n.to_str()).unwrap_or("");
                    name.starts_with("libcgvf_ffi") && name.ends_with(".a")
                }),
        )
        .find(|p| p.exists())
}

#[test]
fn header_compiles_and_links_from_c() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR"));
    if Command::new("cc").arg("--version").output().is_err() {
        eprintln!("skipped: no C compiler");
        return;
    }
    let Some(lib) = static_lib() else {
        eprintln!("skipped: static library not found");
        return;
    };
    let out = Path::new(env!("CARGO_TARGET_TMPDIR")).join("cgvf_smoke");
    let status = Command::new("cc")
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(root.join("include"))
        .arg(root.join("tests/c/smoke.c"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success(), "C smoke program failed to build");
    let run = Command::new(&out).output().unwrap();
    assert!(
        run.status.success(),
        "exit {:?}: {}",
        run.status.code(),
        String::from_utf8_lossy(&run.stderr)
    );
    assert!(String::from_utf8_lossy(&run.stdout).starts_with("ok "));
}
