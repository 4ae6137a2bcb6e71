fn main() {
    // LAPACK from the system (libopenblas / reference liblapack).
    println!("cargo:rustc-link-lib=lapack");
}
