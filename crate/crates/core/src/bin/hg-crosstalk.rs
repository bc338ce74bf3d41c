fn main() {
    std::process::exit(hg_crosstalk::cli::run(std::env::args_os()));
}
