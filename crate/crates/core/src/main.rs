fn main() {
    std::process::exit(monodist::cli::main_with_env());
}
