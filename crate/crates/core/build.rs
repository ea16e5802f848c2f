// LAPACK symbols come from the system OpenBLAS unless overridden.
fn main() {
    println!("cargo:rerun-if-env-changed=DISPERSIM_LAPACK_LIB");
    let lib = std::env::var("DISPERSIM_LAPACK_LIB").unwrap_or_else(|_| "openblas".to_string());
    for name in lib.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        println!("cargo:rustc-link-lib={name}");
    }
}
