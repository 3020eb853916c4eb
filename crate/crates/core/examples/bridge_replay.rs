//! Retrieval from the template knowledge base, then a path the rules cannot
//! translate sent through recorded completions.

use pathforge::bridge::{Bridge, BridgeConfig, BridgeMode, TemplateStore};
use pathforge::cfg::{build_cfg, enumerate_paths, Bounds};
use pathforge::frontend::parse_unit_lenient;
use pathforge::harness::{run_path, FunctionCtx};
use pathforge::smt::SolverConfig;
use pathforge::typing::infer_types;

const SRC: &str = "\
def aliasAppend(nums: list[int]) -> int:
    other = nums
    other.append(1)
    if len(nums) > 2:
        return 1
    return 0
";

fn main() {
    let store = TemplateStore::shipped();
    for (t, score) in store.retrieve("3\texpression\tother.append(1)", 3) {
        println!("{} {:<16} {score:.3}", t.id, t.name);
    }

    let fixtures = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/bridge");
    let config = BridgeConfig {
        mode: BridgeMode::Replay(fixtures.into()),
        ..BridgeConfig::default()
    };
    let solver = SolverConfig::default();
    let bridge = Bridge::from_config(config, solver.clone(), None).unwrap();
    let f = parse_unit_lenient(SRC, "alias.py").unwrap().functions.remove(0);
    let env = infer_types(&f).unwrap();
    let ctx = FunctionCtx { file: "alias.py", source: SRC, f: &f, env: &env };
    for (id, p) in enumerate_paths(&build_cfg(&f), &Bounds::default()).iter().enumerate() {
        let rules = run_path(ctx, p, id, &solver, None).record;
        let bridged = run_path(ctx, p, id, &solver, bridge.as_ref()).record;
        println!(
            "path {id}: rules {:?}, bridge {:?} {:?} {:?}",
            rules.status, bridged.source, bridged.status, bridged.input
        );
    }
}
