use std::process::Command;

fn main() {
    let describe = Command::new("git")
        .args(["describe", "--always", "--dirty", "--tags"])
        .output()
        .ok()
        .filter(|o| o.status.success())
        .map(|o| String::from_utf8_lossy(&o.stdout).trim().to_string())
        .filter(|s| !s.is_empty())
        .unwrap_or_else(|| format!("v{}-nogit", env!("CARGO_PKG_VERSION")));
    println!("cargo:rustc-env=SHORTFALL_BUILD_ID={describe}");
    println!("cargo:rerun-if-changed=../../.git/HEAD");
    // HEAD is usually a symbolic ref; watch the branch file it points to.
    if let Ok(head) = std::fs::read_to_string("../../.git/HEAD") {
        if let Some(branch) = head.strip_prefix("ref: ") {
            println!("cargo:rerun-if-changed=../../.git/{}", branch.trim());
        }
    }
}
