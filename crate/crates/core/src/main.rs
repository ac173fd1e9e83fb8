fn main() {
    std::process::exit(mellin_lattice::cli::run(std::env::args_os()));
}
