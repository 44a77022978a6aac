fn main() {
    std::process::exit(qlb::cli::run(std::env::args_os()));
}
