use std::path::PathBuf;
use std::process::Command;

fn manifest() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

fn have_cc() -> bool {
    Command::new("cc").arg("--version").output().is_ok()
}

#[test]
fn header_compiles_as_c_and_cpp() {
    if !have_cc() {
        eprintln!("no C compiler; skipped");
        return;
    }
    let header = manifest().join("include/specbisect.h");
    for lang in ["c", "c++"] {
        let out = Command::new("cc")
            .args(["-fsyntax-only", "-Wall", "-Werror", "-x", lang])
            .arg(&header)
            .output()
            .unwrap();
        assert!(out.status.success(), "{lang}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn c_program_links_against_the_static_library() {
    if !have_cc() {
        eprintln!("no C compiler; skipped");
        return;
    }
    let target = std::env::var_os("CARGO_TARGET_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| manifest().join("../../target"));
    // test builds only produce the rlib; build the static library explicitly
    let status = Command::new(env!("CARGO"))
        .args(["build", "--quiet", "-p", "specbisect-ffi", "--lib"])
        .current_dir(manifest())
        .status()
        .unwrap();
    assert!(status.success());
    let lib = target.join("debug").join("libspecbisect_ffi.a");
    assert!(lib.exists(), "{} missing", lib.display());
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("demo.c");
    std::fs::write(
        &src,
        r#"
#include <stdio.h>
#include "specbisect.h"
int main(void) {
    double re[4] = {2.0, 1.0, 1.0, 2.0};
    SbMatrix *a = NULL;
    SbEigh *r = NULL;
    double d[2];
    if (sb_matrix_from_f64(2, 2, re, NULL, 53, &a) != SB_STATUS_OK) return 1;
    if (sb_eigh(a, 1e-8, 0.5, 1, 53, &r) != SB_STATUS_OK) return 2;
    if (sb_eigh_values(r, d) != SB_STATUS_OK) return 3;
    printf("%.6f %.6f\n", d[0] < d[1] ? d[0] : d[1], d[0] < d[1] ? d[1] : d[0]);
    sb_eigh_free(r);
    sb_matrix_free(a);
    return 0;
}
"#,
    )
    .unwrap();
    let exe = dir.path().join("demo");
    let out = Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(manifest().join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let run = Command::new(&exe).output().unwrap();
    assert!(run.status.success());
    assert_eq!(String::from_utf8_lossy(&run.stdout).trim(), "1.000000 3.000000");
}
