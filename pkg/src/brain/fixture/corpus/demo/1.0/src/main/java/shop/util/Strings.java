package shop.util;

/**
 * String helpers for search form input: an empty query string, blank
 * search text and padded results. Empty query strings are rejected with an
 * exception by callers; the results page shows an error.
 */
public final class Strings {
    private Strings() {
    }

    public static boolean isBlank(String s) {
        return s == null || s.trim().isEmpty();
    }

    public static String padLeft(String s, int width) {
        StringBuilder sb = new StringBuilder();
        for (int i = s.length(); i < width; i++) {
            sb.append(' ');
        }
        return sb.append(s).toString();
    }
}
