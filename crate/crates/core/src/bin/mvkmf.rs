fn main() {
    std::process::exit(mvkmf::cli::run(std::env::args_os()));
}
