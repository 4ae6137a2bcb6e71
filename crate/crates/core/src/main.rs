fn main() {
    std::process::exit(robreg::cli::run());
}
