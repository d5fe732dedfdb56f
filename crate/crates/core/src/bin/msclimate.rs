fn main() {
    std::process::exit(msclimate::cli::run(std::env::args().collect()));
}
