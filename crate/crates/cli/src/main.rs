fn main() {
    std::process::exit(vi_solve::run(std::env::args_os()));
}
