fn main() {
    let code = minknap::gaplab::cli::run(std::env::args_os());
    std::process::exit(code);
}
