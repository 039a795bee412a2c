fn main() {
    std::process::exit(qsdc::cli::run(std::env::args_os()));
}
