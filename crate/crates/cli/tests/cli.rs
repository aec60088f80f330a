use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn conmod(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_conmod")).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_string()
}

#[test]
fn list_names_every_model() {
    let out = conmod(&["list"]);
    assert_eq!(code(&out), 0);
    assert_eq!(
        stdout(&out),
        "functions\ninverse\ntransforms\nreactions\nnetwork\nball\nrov\n"
    );
}

#[test]
fn balance_prints_coefficients() {
    let out = conmod(&["balance", "NO2 -> NO3 + NO"]);
    assert_eq!((code(&out), stdout(&out).as_str()), (0, "2 NO2 -> 1 NO3 + 1 NO\n"));
    let out = conmod(&["balance", "CO2 + H2O -> C6H12O6 + O2"]);
    assert_eq!(stdout(&out), "6 CO2 + 6 H2O -> 1 C6H12O6 + 6 O2\n");
}

#[test]
fn balance_failures() {
    let out = conmod(&["balance", "H2 -> O2"]);
    assert_eq!(code(&out), 5);
    assert!(stdout(&out).is_empty());
    let out = conmod(&["balance", "H2 + Xy -> H2O"]);
    assert_eq!(code(&out), 6);
    assert!(stderr(&out).contains("       ^"), "{}", stderr(&out));
    assert_eq!(code(&conmod(&["balance", "H2 + O2"])), 6);
}

#[test]
fn eval_prints_the_call() {
    let out = conmod(&["eval", "functions", "tf", "eval", "1"]);
    assert_eq!((code(&out), stdout(&out).as_str()), (0, "tf.eval(1) = 10\n"));
    let out = conmod(&["eval", "inverse", "inv", "eval", "15"]);
    assert_eq!(stdout(&out), "inv.eval(15) = 2\n");
    assert_eq!(code(&conmod(&["eval", "functions", "tf", "eval", "3"])), 4);
    assert_eq!(code(&conmod(&["eval", "functions", "nobody", "eval", "1"])), 4);
    let out = conmod(&["eval", "transforms", "bumped", "eval", "-1.5"]);
    assert_eq!((code(&out), stdout(&out).as_str()), (0, "bumped.eval(-1.5) = 20.25\n"));
}

#[test]
fn unknown_model_and_bad_usage() {
    let out = conmod(&["narrate", "nosuch"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("functions"));
    assert_eq!(code(&conmod(&["frobnicate"])), 2);
}

#[test]
fn render_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    for (model, level) in [
        ("functions", "types"),
        ("network", "instances"),
        ("rov", "wireframe"),
        ("ball", "instances"),
    ] {
        let (a, b) = (path(dir.path(), "a.svg"), path(dir.path(), "b.svg"));
        assert_eq!(code(&conmod(&["render", model, "--level", level, "-o", &a])), 0);
        assert_eq!(code(&conmod(&["render", model, "--level", level, "-o", &b])), 0);
        let (x, y) = (fs::read(&a).unwrap(), fs::read(&b).unwrap());
        assert!(!x.is_empty());
        assert_eq!(x, y, "{model} {level}");
    }
    assert_eq!(
        code(&conmod(&[
            "render",
            "functions",
            "--level",
            "wireframe",
            "-o",
            &path(dir.path(), "w.svg")
        ])),
        3
    );
}

#[test]
fn unwritable_output_is_an_io_failure() {
    let dir = tempfile::tempdir().unwrap();
    let target = path(dir.path(), "missing/dir/out.svg");
    assert_eq!(code(&conmod(&["render", "functions", "-o", &target])), 3);
}

#[test]
fn plot_and_animate() {
    let dir = tempfile::tempdir().unwrap();
    let svg = path(dir.path(), "plot.svg");
    assert_eq!(code(&conmod(&["plot", "ball", "b", "-o", &svg])), 0);
    assert!(fs::read_to_string(&svg).unwrap().contains("series:2"));
    let svg2 = path(dir.path(), "plot2.svg");
    assert_eq!(
        code(&conmod(&[
            "plot",
            "transforms",
            "square",
            "eval",
            "--range",
            "-1:4",
            "-o",
            &svg2
        ])),
        0
    );
    assert_eq!(code(&conmod(&["plot", "ball", "b", "--range", "5:1", "-o", &svg2])), 2);
    assert_eq!(code(&conmod(&["plot", "rov", "rov", "-o", &svg2])), 4);

    let frames = dir.path().join("frames");
    let fdir = frames.to_str().unwrap();
    let out = conmod(&["animate", "ball", "b", "--range", "0:10", "--frames", "60", "-o", fdir]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let mut names: Vec<String> = fs::read_dir(&frames)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(names.len(), 60);
    assert_eq!(names[0], "frame_0000.svg");
    assert_eq!(names[59], "frame_0059.svg");
    assert!(fs::read_to_string(frames.join("frame_0059.svg"))
        .unwrap()
        .contains("t = 10.000"));
}

#[test]
fn narrate() {
    let out = conmod(&["narrate", "network"]);
    assert_eq!(
        stdout(&out),
        "2 NO2 react to produce 1 NO3 and 1 NO.\n1 NO3 and 1 CO react to produce 1 NO2 and 1 CO2.\n"
    );
    assert_eq!(code(&conmod(&["narrate", "rov"])), 3);
}

#[test]
fn element_file_extends_the_table() {
    let dir = tempfile::tempdir().unwrap();
    let file = path(dir.path(), "elements.txt");
    fs::write(&file, "# sodium and sulfur\nNa 22.99\nS 32.06\n").unwrap();
    let out = conmod(&["--elements", &file, "balance", "Na + S -> Na2S"]);
    assert_eq!((code(&out), stdout(&out).as_str()), (0, "2 Na + 1 S -> 1 Na2S\n"));
    assert_eq!(code(&conmod(&["balance", "Na + S -> Na2S"])), 6);
    fs::write(&file, "Na heavy\n").unwrap();
    assert_eq!(code(&conmod(&["--elements", &file, "list"])), 6);
    assert_eq!(code(&conmod(&["--elements", &path(dir.path(), "none.txt"), "list"])), 3);
}
