//! Regenerates the bundled window catalog (windows.json at the repo root).

fn main() {
    let catalog = gabinv::windows::builtin_catalog();
    println!("{}", serde_json::to_string_pretty(&catalog).unwrap());
}
