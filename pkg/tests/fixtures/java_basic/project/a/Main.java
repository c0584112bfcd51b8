package a;

import b.Util;

public class Main {
    void run() {
        Greeter g = new Greeter();
        String text = Util.shout(g.greet());
        print(text);
    }

    void print(String message) {
        int n = message.length();
    }
}
