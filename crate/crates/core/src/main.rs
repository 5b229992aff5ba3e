fn main() {
    std::process::exit(otr_bounds::io::cli::main_entry());
}
