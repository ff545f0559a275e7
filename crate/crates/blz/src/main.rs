fn main() {
    std::process::exit(blz::cli::main_with_args(std::env::args()));
}
