fn main() {
    std::process::exit(twistfft::cli::run(std::env::args_os()));
}
