fn main() {
    std::process::exit(nonatomic_nets::cli::run(std::env::args_os()));
}
