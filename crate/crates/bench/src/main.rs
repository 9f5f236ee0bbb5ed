fn main() {
    let code = hyperfem_bench::cli::run(std::env::args_os(), &mut std::io::stdout());
    std::process::exit(code);
}
