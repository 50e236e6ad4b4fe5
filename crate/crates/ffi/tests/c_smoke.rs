//! Compiles and runs a small C program against the generated header and
//! the static library, exercising the ABI end to end.

use std::path::PathBuf;
use std::process::Command;

const PROGRAM: &str = r#"
#include <stdio.h>
#include <math.h>
#include "greenpol.h"

int main(void) {
    GpLattice *lattice = NULL;
    if (gp_lattice_reduce(1.0, 0.0, 0.0, 1.0, &lattice) != GpStatus_Ok) return 1;

    GpGreen *green = NULL;
    if (gp_green_new(lattice, 0.0, &green) != GpStatus_Ok) return 2;
    gp_lattice_free(lattice);

    double value = 0.0;
    if (gp_green_value(green, 0.3, 0.4, &value) != GpStatus_Ok) return 3;
    printf("g %.15e\n", value);

    if (gp_green_value(green, 0.0, 0.0, &value) != GpStatus_SingularInput) return 4;
    const char *message = gp_last_error_message();
    if (message == NULL) return 5;

    double residual = 1.0;
    if (gp_check_main_theorem(green, 2, 0.21, 0.34, &residual) != GpStatus_Ok) return 6;
    if (!(residual < 1e-6)) return 7;
    printf("theorem_residual %.3e\n", residual);

    size_t steps = 0;
    if (gp_green_lemma_verify(1, 1, &steps) != GpStatus_Ok) return 8;
    printf("lemma_steps %zu\n", steps);

    gp_green_free(green);
    return 0;
}
"#;

#[test]
fn c_program_links_and_runs() {
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let include_dir = manifest.join("include");
    assert!(
        include_dir.join("greenpol.h").exists(),
        "header not generated"
    );
    // `cargo test` links the test harness against the rlib only; build the
    // staticlib artifact explicitly
    let cargo = std::env::var("CARGO").unwrap_or_else(|_| "cargo".to_string());
    let mut build_args = vec!["build", "-p", "greenpol-ffi"];
    if !cfg!(debug_assertions) {
        build_args.push("--release");
    }
    let build = Command::new(cargo)
        .args(&build_args)
        .current_dir(&manifest)
        .output()
        .expect("cargo runs");
    assert!(
        build.status.success(),
        "staticlib build failed: {}",
        String::from_utf8_lossy(&build.stderr)
    );
    let profile_dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../target")
        .join(if cfg!(debug_assertions) { "debug" } else { "release" });
    let staticlib = profile_dir.join("libgreenpol_ffi.a");
    assert!(staticlib.exists(), "static library missing at {staticlib:?}");

    let work = std::env::temp_dir().join(format!("greenpol-c-smoke-{}", std::process::id()));
    std::fs::create_dir_all(&work).unwrap();
    let src = work.join("smoke.c");
    let bin = work.join("smoke");
    std::fs::write(&src, PROGRAM).unwrap();

    let compile = Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(&include_dir)
        .arg(&staticlib)
        .args(["-lm", "-lpthread", "-ldl"])
        .arg("-o")
        .arg(&bin)
        .output()
        .expect("cc is available");
    assert!(
        compile.status.success(),
        "compilation failed: {}",
        String::from_utf8_lossy(&compile.stderr)
    );

    let run = Command::new(&bin).output().unwrap();
    assert!(
        run.status.success(),
        "C program exited with {:?}",
        run.status.code()
    );
    let stdout = String::from_utf8(run.stdout).unwrap();
    let g_line = stdout.lines().find(|l| l.starts_with("g ")).unwrap();
    let value: f64 = g_line[2..].parse().unwrap();
    assert!((value - (-0.5306375309525166)).abs() < 1e-12);
    assert!(stdout.contains("lemma_steps 18"));
    std::fs::remove_dir_all(&work).ok();
}
