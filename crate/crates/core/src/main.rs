fn main() {
    std::process::exit(proppwalk::cli::run());
}
