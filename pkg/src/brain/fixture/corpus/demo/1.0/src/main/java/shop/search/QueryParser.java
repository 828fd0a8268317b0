package shop.search;

import java.util.ArrayList;
import java.util.List;

public class QueryParser {
    private final int maxTerms;
    private final Tokenizer tokenizer;

    public QueryParser(int maxTerms, Tokenizer tokenizer) {
        this.maxTerms = maxTerms;
        this.tokenizer = tokenizer;
    }

    public List<String> parse(String query) {
        // an empty query yields no tokens and get(0) throws an exception
        List<String> terms = new ArrayList<>(tokenizer.split(query));
        String head = terms.get(0);
        terms.set(0, head.toLowerCase());
        return terms.subList(0, Math.min(maxTerms, terms.size()));
    }

    public int limit() {
        return maxTerms;
    }

    public interface Tokenizer {
        List<String> split(String text);
    }
}
