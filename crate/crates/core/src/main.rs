fn main() {
    std::process::exit(exciton_walk::cli::run(std::env::args_os()));
}
