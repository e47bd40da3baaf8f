use std::path::{Path, PathBuf};
use std::process::Command;

fn manifest() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

/// Directory holding the static library, two levels above the test binary.
fn lib_dir() -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    exe.parent().unwrap().parent().unwrap().to_path_buf()
}

fn cc(dir: &Path, src: &str, extra: &[&str]) -> std::process::Output {
    let file = dir.join("main.c");
    std::fs::write(&file, src).unwrap();
    Command::new("cc")
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(manifest().join("include"))
        .arg(&file)
        .args(extra)
        .output()
        .expect("a C compiler is on PATH")
}

const PROGRAM: &str = r#"
#include <stdio.h>
#include <string.h>
#include "netlogic.h"

int main(void) {
    const char *schema = "predicate A(Thing) role=evidence\npredicate B(Thing) role=query\nconst Thing t1\n";
    NlModel *m = NULL;
    if (nl_model_new(schema, "1: A(x) => B(x)\n", "A(t1)\n", NULL, NULL, &m) != NL_STATUS_OK) {
        fprintf(stderr, "%s\n", nl_last_error());
        return 1;
    }
    NlResult *r = NULL;
    if (nl_infer_psl(m, NULL, &r) != NL_STATUS_OK) return 2;
    double v = 0.0;
    if (nl_result_lookup(r, "B(t1)", &v) != NL_STATUS_OK) return 3;
    printf("%s %.6f\n", nl_result_atom(r, 0), v);
    nl_result_free(r);
    nl_model_free(m);
    if (nl_model_new(NULL, "1: B(x\n", NULL, NULL, NULL, &m) != NL_STATUS_PARSE) return 4;
    return m == NULL ? 0 : 5;
}
"#;

#[test]
fn header_compiles_and_links() {
    let tmp = tempfile::tempdir().unwrap();
    let header = std::fs::read_to_string(manifest().join("include/netlogic.h")).unwrap();
    assert!(header.contains("nl_infer_mln"));
    let lib = lib_dir().join("libnetlogic_ffi.a");
    assert!(lib.exists(), "{} missing", lib.display());
    let exe = tmp.path().join("demo");
    let out = cc(
        tmp.path(),
        PROGRAM,
        &["-o", exe.to_str().unwrap(), lib.to_str().unwrap(), "-lpthread", "-ldl", "-lm"],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let run = Command::new(&exe).output().unwrap();
    assert!(run.status.success(), "exit {:?}: {}", run.status, String::from_utf8_lossy(&run.stderr));
    assert_eq!(String::from_utf8_lossy(&run.stdout), "B(t1) 1.000000\n");
}
