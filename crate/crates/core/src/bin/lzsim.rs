fn main() {
    std::process::exit(lzsim::cli::run(std::env::args_os()));
}
