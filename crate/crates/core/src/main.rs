fn main() {
    transmon_amp::cli::main()
}
