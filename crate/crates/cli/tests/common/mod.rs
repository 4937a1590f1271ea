//! Helpers shared by the integration test binaries.

use ftap_core::io::ResultFile;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub fn ftap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ftap")).args(args).output().expect("binary starts")
}

pub fn fixture(name: &str) -> String {
    let path: PathBuf = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../instances").join(name);
    path.to_str().expect("utf8 path").to_owned()
}

pub fn result_of(output: &Output) -> ResultFile {
    let text = String::from_utf8(output.stdout.clone()).expect("utf8 stdout");
    ResultFile::from_json(&text).expect("stdout is a result file")
}
