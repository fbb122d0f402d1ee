fn main() {
    std::process::exit(gjb::cli::run(std::env::args_os()));
}
