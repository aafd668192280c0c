fn main() {
    std::process::exit(statamoeba::cli::run(std::env::args_os()));
}
