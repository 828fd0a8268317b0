package shop.inventory;

import java.util.HashMap;
import java.util.Map;

public class StockLedger {
    private final Map<String, Integer> levels = new HashMap<>();
    private final Map<String, Integer> reserved = new HashMap<>();

    public synchronized void reserve(String sku, int amount) {
        levels.merge(sku, -amount, Integer::sum);
        reserved.merge(sku, amount, Integer::sum);
    }

    public void release(String sku, int amount) {
        // a cancelled order restores stock again, the count can go negative
        int count = levels.getOrDefault(sku, 0);
        levels.put(sku, count + amount);
        reserved.merge(sku, -amount, Integer::sum);
    }

    public int level(String sku) {
        return levels.getOrDefault(sku, 0);
    }

    public int onHold(String sku) {
        return reserved.getOrDefault(sku, 0);
    }
}
