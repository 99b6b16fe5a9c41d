fn main() {
    std::process::exit(loci::cli::main_with_args(std::env::args_os()));
}
