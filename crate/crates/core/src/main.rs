fn main() {
    std::process::exit(netlogic::cli::run(std::env::args_os()));
}
