use blz::cli::main_with_args;
use std::fs;
use std::path::PathBuf;

fn scratch(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("blz-cli-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&d);
    fs::create_dir_all(&d).unwrap();
    d
}

fn run(args: &[&str]) -> i32 {
    main_with_args(std::iter::once("blz").chain(args.iter().copied()).map(String::from))
}

#[test]
fn tba_run_writes_outputs() {
    let d = scratch("tba");
    let cfg = d.join("tba.conf");
    fs::write(&cfg, "# golden ratio\nn = 1\nr = 1.0\n").unwrap();
    let out = d.join("out");
    assert_eq!(run(&["tba", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--threads", "2"]), 0);
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("results.json")).unwrap()).unwrap();
    assert_eq!(json["pipeline"], "tba");
    assert!(fs::read_to_string(out.join("summary.txt")).unwrap().contains("PASS"));
    let csvs: Vec<_> = fs::read_dir(&out).unwrap().filter_map(|e| e.ok()).filter(|e| e.path().extension().is_some_and(|x| x == "csv")).collect();
    assert!(!csvs.is_empty());
    for c in csvs {
        assert!(fs::read_to_string(c.path()).unwrap().starts_with("# {"));
    }
}

#[test]
fn exit_codes() {
    let d = scratch("codes");
    let typo = d.join("typo.conf");
    fs::write(&typo, "pipeline = tba\nnn = 1\n").unwrap();
    assert_eq!(run(&["validate", "--config", typo.to_str().unwrap()]), 1);
    assert_eq!(run(&["tba", "--config", typo.to_str().unwrap()]), 1);
    let empty = d.join("empty.conf");
    fs::write(&empty, "# nothing\n").unwrap();
    assert_eq!(run(&["validate", "--config", empty.to_str().unwrap()]), 1);
    assert_eq!(run(&["nonsense", "--config", empty.to_str().unwrap()]), 1);
    assert_eq!(run(&["tba"]), 1);
    let good = d.join("good.conf");
    fs::write(&good, "pipeline = vacuum\nn = 2\n").unwrap();
    assert_eq!(run(&["validate", "--config", good.to_str().unwrap()]), 0);
    let dom = d.join("dom.conf");
    fs::write(&dom, "beta2 = 1.5\np = 0.1\n").unwrap();
    assert_eq!(run(&["nlie-cft", "--config", dom.to_str().unwrap(), "--out", d.join("o").to_str().unwrap()]), 4);
}
