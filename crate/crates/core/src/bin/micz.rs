fn main() {
    std::process::exit(micz_core::cli::main());
}
