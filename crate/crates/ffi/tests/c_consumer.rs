//! Compiles a small C program against the generated header and static library.

use std::path::PathBuf;
use std::process::Command;

const PROGRAM: &str = r#"
#include <math.h>
#include <stdio.h>
#include "hg_crosstalk.h"

int main(void) {
    HgChannel *ch = NULL;
    HgStatus st = hg_channel_new(0.8e-6, 5000.0, 0.1 / sqrt(2.0), HG_TURBULENCE_KIND_RYTOV, 0.02, &ch);
    if (st != HG_STATUS_OK) { fprintf(stderr, "%s\n", hg_status_message(st)); return 1; }
    HgMatrix *m = NULL;
    if (hg_matrix_new(ch, 3, true, &m) != HG_STATUS_OK) return 2;
    double p = 0.0;
    if (hg_matrix_get(m, 0, 0, &p) != HG_STATUS_OK) return 3;
    printf("%zu %.5f\n", hg_matrix_dim(m), p);
    hg_matrix_free(m);
    hg_channel_free(ch);
    if (hg_channel_new(-1.0, 5000.0, 0.07, HG_TURBULENCE_KIND_VACUUM, 0.0, &ch) != HG_STATUS_DOMAIN) return 4;
    printf("%s\n", hg_last_error_message());
    return 0;
}
"#;

#[test]
fn c_program_links_and_runs() {
    let crate_dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let header_dir = crate_dir.join("include");
    assert!(
        header_dir.join("hg_crosstalk.h").exists(),
        "header not generated"
    );
    // target/<profile>/deps/<test binary>
    let profile_dir = std::env::current_exe()
        .unwrap()
        .parent()
        .unwrap()
        .parent()
        .unwrap()
        .to_path_buf();
    let lib = profile_dir.join("libhg_crosstalk_ffi.a");
    assert!(lib.exists(), "static library missing at {}", lib.display());

    let work = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("c_consumer");
    std::fs::create_dir_all(&work).unwrap();
    let src = work.join("main.c");
    let exe = work.join("main");
    std::fs::write(&src, PROGRAM).unwrap();
    let status = Command::new("cc")
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(&header_dir)
        .arg(&src)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .expect("C compiler available");
    assert!(status.success(), "C compilation failed");
    let out = Command::new(&exe).output().unwrap();
    assert!(
        out.status.success(),
        "C program exited with {:?}",
        out.status
    );
    let stdout = String::from_utf8(out.stdout).unwrap();
    let mut lines = stdout.lines();
    assert_eq!(lines.next(), Some("10 0.23134"));
    assert!(lines.next().unwrap().contains("wavelength"));
}
