//! Compiles a small C program against the generated header and links it
//! with the static library.

use std::path::PathBuf;
use std::process::Command;

const PROGRAM: &str = r#"
#include <stdio.h>
#include <string.h>
#include "fen_ffi.h"

int main(void) {
    FenGameHandle *game = NULL;
    FenPartitionHandle *part = NULL;
    if (fen_game_parse("fen 1 3 2 1 1\nF 1 2\nE 1 3\nF 2 3\n", &game) != FEN_STATUS_OK) return 10;
    if (fen_partition_parse("partition 3 3\n1\n2\n3\n", &part) != FEN_STATUS_OK) return 11;
    bool stable = true;
    char *json = NULL;
    if (fen_exact_verify(game, part, "core", 3, &stable, &json) != FEN_STATUS_OK) return 12;
    if (stable || strstr(json, "\"blocking\"") == NULL) return 13;
    fen_string_free(json);
    bool rejected = false;
    if (fen_existence_test(game, 0.9, 3, 1, &rejected, NULL) != FEN_STATUS_OK || !rejected) return 14;
    if (fen_game_parse("garbage", &game) != FEN_STATUS_PARSE_ERROR) return 15;
    if (fen_last_error_message() == NULL) return 16;
    fen_partition_free(part);
    fen_game_free(game);
    printf("ok\n");
    return 0;
}
"#;

fn target_dir() -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    // <target>/<profile>/deps/<test binary>
    exe.parent().unwrap().parent().unwrap().to_path_buf()
}

#[test]
fn c_program_links_and_runs() {
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let header_dir = manifest.join("include");
    assert!(header_dir.join("fen_ffi.h").exists(), "header was not generated");
    let lib = target_dir().join("libfen_ffi.a");
    if !lib.exists() || Command::new("cc").arg("--version").output().is_err() {
        eprintln!("skipping: no C compiler or static library at {}", lib.display());
        return;
    }
    let work = tempfile::tempdir().unwrap();
    let src = work.path().join("client.c");
    std::fs::write(&src, PROGRAM).unwrap();
    let exe = work.path().join("client");
    let status = Command::new("cc")
        .arg("-std=c11")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(&header_dir)
        .arg(&src)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success(), "C compilation failed");
    let out = Command::new(&exe).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "client exited with {:?}", out.status);
    assert_eq!(String::from_utf8_lossy(&out.stdout), "ok\n");
}
