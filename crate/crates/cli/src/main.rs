fn main() {
    std::process::exit(tvlens::main_with(std::env::args_os()));
}
