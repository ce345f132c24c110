use critwalk::harness::{execute, preset, run, ExperimentConfig};
use critwalk::Error;

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .unwrap()
        .install(f)
}

fn small(id: &str) -> ExperimentConfig {
    let mut c = preset(id, 11).unwrap();
    c.replicates = match id {
        "1" | "9" => 4000,
        "2" => 20_000,
        "4" => 2000,
        "3" => 200,
        "ipc-envelope" => 20,
        "k-projection" => 30,
        _ => 50,
    };
    match id {
        "3" => c.sizes = Some(vec![10, 20, 30]),
        "ipc-envelope" => {
            c.sizes = Some(vec![20, 40]);
            c.settings.insert("v_runs".into(), 50.0);
        }
        "k-projection" => c.sizes = Some(vec![500, 1000]),
        "local-time" => c.sizes = Some(vec![50, 100, 200]),
        _ => {}
    }
    c
}

#[test]
fn reports_do_not_depend_on_thread_count() {
    for id in [
        "1",
        "2",
        "3",
        "4",
        "9",
        "10",
        "ipc-envelope",
        "k-projection",
        "local-time",
    ] {
        let c = small(id);
        let one = in_pool(1, || execute(&c).unwrap().0.to_json());
        let three = in_pool(3, || execute(&c).unwrap().0.to_json());
        assert_eq!(one, three, "{id}");
        assert!(one.contains(&c.hash()));
    }
}

#[test]
fn seed_changes_the_report() {
    let a = small("1");
    let mut b = a.clone();
    b.seed += 1;
    assert_ne!(execute(&a).unwrap().0.metrics, execute(&b).unwrap().0.metrics);
}

#[test]
fn rerun_from_file_is_byte_identical() {
    let dir = std::env::temp_dir().join(format!("critwalk-det-{}", std::process::id()));
    let mut c = small("local-time");
    c.output_dir = dir.clone();
    let cfg_path = dir.join("config.json");
    std::fs::create_dir_all(&dir).unwrap();
    std::fs::write(&cfg_path, c.to_json()).unwrap();

    let first = run(&ExperimentConfig::load(&cfg_path).unwrap()).unwrap();
    let bytes: Vec<Vec<u8>> = first.files.iter().map(|p| std::fs::read(p).unwrap()).collect();
    let second = run(&ExperimentConfig::load(&cfg_path).unwrap()).unwrap();
    let again: Vec<Vec<u8>> = second.files.iter().map(|p| std::fs::read(p).unwrap()).collect();
    assert_eq!(bytes, again);
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn zero_replicates_is_a_config_error() {
    let mut c = small("10");
    c.replicates = 0;
    assert!(matches!(execute(&c), Err(Error::Config(_))));
    let text = c.to_json();
    assert!(matches!(ExperimentConfig::from_json(&text), Err(Error::Config(_))));
}
