package b;

public class Util {
    static String shout(String input) {
        return input;
    }
}
