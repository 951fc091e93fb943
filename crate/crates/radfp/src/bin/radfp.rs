fn main() {
    std::process::exit(radfp::cli::run(std::env::args_os()));
}
