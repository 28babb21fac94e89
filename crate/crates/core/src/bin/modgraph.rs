fn main() {
    std::process::exit(modgraph::cli::main_with_args());
}
